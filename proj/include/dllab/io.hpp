#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dllab/correlations.hpp"
#include "dllab/models.hpp"

namespace dllab {

using Json        = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr int kSchemaVersion      = 1;
constexpr const char *kVersion    = "0.1.0";

// ---- Hamiltonian documents -------------------------------------------------

OrderedJson hamiltonian_to_json(const HamiltonianSpec &h);
HamiltonianSpec hamiltonian_from_json(const Json &doc);

OrderedJson matrix_to_json(const Matrix &m); // rows of [re, im] pairs
Matrix matrix_from_json(const Json &rows, const std::string &field);

// ---- State vectors ----------------------------------------------------------

// Binary layout: uint64 n, uint64 d (little endian), then d^n (re, im) doubles.
std::string state_to_binary(const SiteSpace &sites, const Vector &psi);
std::pair<std::pair<int, int>, Vector> state_from_binary(const std::string &bytes);
OrderedJson state_to_json(const SiteSpace &sites, const Vector &psi);
std::pair<std::pair<int, int>, Vector> state_from_json(const Json &doc);

// ---- Text output --------------------------------------------------------------

/// JSON text with 17 significant digits and null for non-finite numbers.
std::string dump_json(const OrderedJson &doc);

std::string read_file(const std::string &path);
/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string &path, const std::string &content);

std::string format_number(double x); // %.17g, "nan"/"inf" spelled out for CSV

std::string spectrum_csv(const Eigenpairs &e);
std::string convergence_csv(const std::vector<double> &trace, double bound);
std::string schmidt_csv(const SchmidtData &s);
std::string decay_csv(const DecayProfile &p);

// ---- Reports ------------------------------------------------------------------

struct CheckRecord {
    std::string name;
    std::string anchor; // what the check instantiates, or "plumbing"
    std::optional<double> measured;
    std::optional<double> bound;
    std::optional<double> tolerance;
    CheckStatus status = CheckStatus::Pass;
    std::string note;

    [[nodiscard]] bool asserted() const { return status != CheckStatus::HypothesisNotMet; }
    bool operator==(const CheckRecord &) const = default;
};

struct Report {
    std::string command;
    std::string config_hash;
    std::string version = kVersion;
    std::string timestamp;
    std::vector<CheckRecord> checks;
    std::map<std::string, std::string> artifacts; // name -> file name
    OrderedJson results = OrderedJson::object();

    [[nodiscard]] bool overall_pass() const;
    bool operator==(const Report &) const = default;
};

OrderedJson report_to_json(const Report &r);
Report report_from_json(const Json &doc);
std::string checks_csv(const Report &r);

// ---- Runs -----------------------------------------------------------------------

struct RunConfig {
    std::string command;
    std::optional<ModelDescriptor> model;
    std::optional<std::string> model_path;
    Json parameters = Json::object();
};

const std::vector<std::string> &run_commands();

/// Parses a config document; syntax errors carry line and column.
RunConfig parse_run_config(const std::string &text);
RunConfig run_config_from_json(const Json &doc);
Json run_config_to_json(const RunConfig &cfg);
std::string config_hash(const RunConfig &cfg);

ModelDescriptor model_descriptor_from_json(const Json &doc);
Json model_descriptor_to_json(const ModelDescriptor &d);

enum class OutputFormat { Structured, Csv };
OutputFormat output_format_from_string(const std::string &s);

struct RunResult {
    Report report;
    std::map<std::string, std::string> files; // CSV traces by file name
};

/// Dispatches to the pipeline named by cfg.command. Relative model paths are
/// resolved against base_dir.
RunResult run(const RunConfig &cfg, const std::string &base_dir = ".");

/// Writes the report (structured) or a check table (csv) plus all traces.
void emit_report(const RunResult &result, const std::string &out_dir, OutputFormat format);

} // namespace dllab
