// dl-lab: command-line driver over the dllab C API.
// Exit status: 0 every asserted check passed, 1 some check failed, 2 error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dllab/dllab.h"

namespace {

    using nlohmann::json;

    constexpr int kExitFail  = 1;
    constexpr int kExitError = 2;

    int report_error(dllab_status s) {
        std::cerr << "dl-lab: error [" << dllab_status_name(s) << "]: " << dllab_last_error() << "\n";
        return kExitError;
    }

    std::string take(char *s) {
        std::string out = s ? s : "";
        dllab_string_free(s);
        return out;
    }

    std::string fmt(const json &v) {
        if(v.is_null()) return "-";
        if(v.is_number()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
            return buf;
        }
        return v.dump();
    }

    void print_summary(const json &report) {
        for(const auto &c : report.at("checks")) {
            const bool gated = c.at("hypothesis_status") == "not-met";
            const char *tag  = gated ? "SKIP" : (c.at("pass").get<bool>() ? "PASS" : "FAIL");
            std::cout << tag << "  " << c.at("name").get<std::string>() << "  measured=" << fmt(c.at("measured"))
                      << " bound=" << fmt(c.at("bound"));
            const auto note = c.value("note", std::string());
            if(!note.empty()) std::cout << "  (" << note << ")";
            std::cout << "\n";
        }
        std::cout << (report.at("overall_pass").get<bool>() ? "overall: pass" : "overall: FAIL") << "\n";
    }

    int run_pipeline(const std::string &command, const std::string &config_path, const std::string &out_dir, const std::string &format,
                     bool quiet) {
        std::ifstream in(config_path, std::ios::binary);
        if(!in) {
            std::cerr << "dl-lab: error [io]: cannot open config '" << config_path << "'\n";
            return kExitError;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        json cfg;
        try {
            cfg = json::parse(ss.str());
        } catch(const json::parse_error &) {
            cfg = nullptr; // let the library produce the line/column diagnostic
        }
        std::string text = ss.str();
        if(cfg.is_object()) {
            if(cfg.contains("command") && cfg["command"] != command) {
                std::cerr << "dl-lab: error [invalid-argument]: config command '" << cfg["command"].get<std::string>()
                          << "' does not match '" << command << "'\n";
                return kExitError;
            }
            cfg["command"] = command;
            text           = cfg.dump();
        }
        const std::string base = std::filesystem::path(config_path).parent_path().string();
        char *report           = nullptr;
        int32_t pass           = 0;
        const auto s = dllab_run(text.c_str(), base.empty() ? "." : base.c_str(), out_dir.c_str(), format.c_str(), &report, &pass);
        if(s != DLLAB_OK) return report_error(s);
        const json doc = json::parse(take(report));
        if(!quiet) print_summary(doc);
        return pass ? 0 : kExitFail;
    }

    int model_list() {
        char *out    = nullptr;
        const auto s = dllab_model_list(&out);
        if(s != DLLAB_OK) return report_error(s);
        for(const auto &m : json::parse(take(out))) std::cout << m.dump() << "\n";
        return 0;
    }

    int model_emit(const std::string &name, const std::vector<std::string> &params, const std::string &out_path) {
        json desc = {{"name", name}};
        for(const auto &kv : params) {
            const auto eq = kv.find('=');
            if(eq == std::string::npos) {
                std::cerr << "dl-lab: error [invalid-argument]: parameter '" << kv << "' is not key=value\n";
                return kExitError;
            }
            try {
                desc[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
            } catch(const std::exception &) {
                std::cerr << "dl-lab: error [invalid-argument]: parameter '" << kv << "' needs an integer value\n";
                return kExitError;
            }
        }
        dllab_hamiltonian *h = nullptr;
        auto s               = dllab_model_build(desc.dump().c_str(), &h);
        if(s != DLLAB_OK) return report_error(s);
        char *doc = nullptr;
        s         = dllab_hamiltonian_to_json(h, &doc);
        dllab_hamiltonian_free(h);
        if(s != DLLAB_OK) return report_error(s);
        const std::string text = take(doc);
        if(out_path.empty() || out_path == "-") {
            std::cout << text;
            return 0;
        }
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if(!(out << text)) {
            std::cerr << "dl-lab: error [io]: cannot write '" << out_path << "'\n";
            return kExitError;
        }
        return 0;
    }

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"dl-lab: numerical checks for alternating-projection bounds on frustration-free Hamiltonians"};
    app.set_version_flag("--version", std::string(dllab_version()));
    app.require_subcommand(1);

    std::string config, out_dir, format = "structured";
    bool quiet = false;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"gap", "spectrum, gap and frustration-freeness"},
        {"dl", "shrinkage of the layered projector product"},
        {"converge", "A^l convergence and the Gaussian filter"},
        {"entropy", "Schmidt spectrum, rank growth and tail bounds"},
        {"arealaw", "area-law certificate"},
        {"correlate", "causality cones and correlation decay"},
        {"measurecheck", "windowed measurement and entropy gap"},
        {"verify", "every applicable check"},
    };
    for(const auto &[name, help] : commands) {
        auto *sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "run config document")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--format", format, "structured|csv")->check(CLI::IsMember({"structured", "csv"}));
        sub->add_flag("--quiet", quiet, "suppress the check summary");
    }

    auto *model = app.add_subcommand("model", "bundled model catalog");
    model->require_subcommand(1);
    model->add_subcommand("list", "print default descriptors");
    auto *emit = model->add_subcommand("emit", "write a model's Hamiltonian document");
    std::string name, out_path;
    std::vector<std::string> params;
    emit->add_option("name", name, "model name")->required();
    emit->add_option("--param", params, "integer parameter key=value (repeatable)");
    emit->add_option("-o,--output", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch(const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    for(const auto &[cmd, help] : commands)
        if(app.got_subcommand(cmd)) return run_pipeline(cmd, config, out_dir, format, quiet);
    if(model->got_subcommand("list")) return model_list();
    return model_emit(name, params, out_path);
}
