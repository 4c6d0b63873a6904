// Copyright 2026 The qndwork Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qndwork/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qndwork::ConfigError("cannot open output file " + path.string());
    out << text;
    if (!out) throw qndwork::ConfigError("failed writing " + path.string());
}

std::string dump(const nlohmann::json &j) {
    return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Work extraction by non-selective measurements of a qubit coupled to a non-Markovian bath"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    unsigned threads = 1;
    bool verbose = false;

    const char *names[] = {"kernels", "work-sweep", "exact", "markovian"};
    const char *help[] = {"relaxation integrals and polarization table (CSV)",
                          "cycle-work routes and measurement bounds over a sweep (CSV)",
                          "exact supersystem run: energy trace (CSV) and work ledger (JSON)",
                          "second-law report for Markovian rate dynamics (JSON)"};
    for (int i = 0; i < 4; ++i) {
        CLI::App *sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config_path, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "output path")->required();
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_flag("--verbose", verbose, "progress on standard error");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    qndwork::RunOptions run;
    run.threads = threads;
    if (verbose) run.log = [](const std::string &m) { std::cerr << "[qndwork] " << m << '\n'; };

    try {
        const qndwork::ScenarioConfig cfg = qndwork::load_config(config_path);
        const std::string which = app.get_subcommands().front()->get_name();
        const std::filesystem::path out(out_path);
        if (which == "kernels") {
            write_file(out, qndwork::run_kernels(cfg, run));
        } else if (which == "work-sweep") {
            write_file(out, qndwork::run_work_sweep(cfg, run));
        } else if (which == "exact") {
            const qndwork::ExactArtifacts a = qndwork::run_exact(cfg, run);
            std::filesystem::path ledger = out;
            ledger.replace_extension(".json");
            if (ledger == out) ledger += ".ledger.json";
            write_file(out, a.csv);
            write_file(ledger, dump(a.ledger));
        } else {
            write_file(out, dump(qndwork::run_markovian(cfg, run)));
        }
    } catch (const qndwork::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qndwork::NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
