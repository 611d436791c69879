#ifndef SLICEFIND_HARNESS_HPP
#define SLICEFIND_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicefind/degrade.hpp"
#include "slicefind/descriptors.hpp"
#include "slicefind/locator.hpp"
#include "slicefind/metrics.hpp"
#include "slicefind/stack.hpp"

namespace slicefind {

enum class ExperimentKind { identity, robustness, cross_patient, atlas };

ExperimentKind experiment_kind_from_string(const std::string& s);
const char* to_string(ExperimentKind kind);

/// One subject stack participating in an experiment.
struct StackRef {
    std::string subject;
    std::string manifest;       ///< manifest path, relative to the spec file
    std::string role = "query"; ///< "query" or "reference"
};

/// Declarative experiment description; serializable so runs are replayable.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::identity;
    std::vector<std::string> methods;
    std::vector<std::string> preprocs = {"none"};
    std::vector<Degradation> degradations;
    std::vector<int> d_values = {5};
    int window = 7;
    std::vector<StackRef> stacks;
    std::uint64_t seed = 0;
    std::vector<int> plot_slice_ids = {25, 50, 100, 150};
    IndexMap index_map;
    std::optional<IndexRange> query_range;
    bool hemisphere_restriction = false; ///< sagittal runs add restricted cells
    std::string features_dir;            ///< external descriptor store

    /// Directory manifest/feature paths resolve against; set by
    /// from_json_file, never serialized, excluded from the config hash.
    std::filesystem::path base_dir = ".";

    static ExperimentSpec from_json(const nlohmann::json& j);
    static ExperimentSpec from_json_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// FNV-1a over the canonical JSON form; stable across runs, changes
    /// with any field.
    std::uint64_t config_hash() const;
};

/// Per-query-subject raw results within one experiment cell.
struct SubjectOutcomes {
    std::string subject;
    std::vector<LocalizationOutcome> outcomes;
    std::vector<double> self_snr;    ///< raw SNR at the expected index
    std::vector<double> robustness;  ///< per included slice (robustness runs)
    std::vector<int> zero_baseline;  ///< query indices excluded from R_x
    int opposite_side = 0;           ///< sagittal picks on the wrong side
};

/// One (plane, variant, method, preproc, degradation) grid cell with its
/// aggregates. Every aggregate is recomputable from the stored outcomes.
struct CellResult {
    std::string plane = "axial";
    std::string variant;             ///< "" or "restricted"
    std::string method;
    std::string preproc = "none";
    std::string degradation = "none";
    std::vector<SubjectOutcomes> subjects;

    std::map<int, double> accuracy_by_d;
    long long cumulative = 0;
    double mean_snr = 0.0;       ///< mean smoothed peak over outcomes
    double mean_self_snr = 0.0;  ///< mean raw SNR at the expected index
    double mean_robustness = 0.0;
    int zero_baseline_excluded = 0;
    int opposite_side_total = 0;

    std::vector<const LocalizationOutcome*> all_outcomes() const;
    /// Recompute accuracy/cumulative/means from the stored outcomes.
    void recompute_aggregates(const std::vector<int>& d_values);
};

/// SNR-vs-reference-index curve for a nominated query slice.
struct CurveRecord {
    std::string method;
    std::string subject;
    std::string degradation = "none";
    int slice_id = 0;
    int start_index = 0;
    std::vector<double> snr;
    std::vector<double> smoothed;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::string version;
    std::string config_hash; ///< 16 hex digits
    std::vector<CellResult> cells;
    std::vector<CurveRecord> curves;
    std::vector<std::string> failures; ///< per-cell errors, run continued

    nlohmann::json to_json() const;
    static ExperimentReport from_json(const nlohmann::json& j);
};

/// External descriptor files keyed by (subject, slice_index, method).
/// Files carry subject either in a "subject" field or, failing that, in
/// their parent directory name.
class FeatureStore {
public:
    /// Recursively ingest every .json under dir. Throws schema_error on a
    /// malformed file and duplicate_entry on a repeated key.
    void ingest(const std::filesystem::path& dir);

    bool contains(const std::string& subject, int slice_index,
                  const std::string& method) const;

    /// Throws missing_feature naming (subject, index, method).
    const DescriptorSet& get(const std::string& subject, int slice_index,
                             const std::string& method) const;

    std::vector<std::string> methods() const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::tuple<std::string, int, std::string>, DescriptorSet> entries_;
};

ExperimentReport run_identity(const ExperimentSpec& spec);
ExperimentReport run_robustness(const ExperimentSpec& spec);
ExperimentReport run_cross_patient(const ExperimentSpec& spec);
ExperimentReport run_atlas(const ExperimentSpec& spec);

/// Dispatch on spec.kind.
ExperimentReport run_experiment(const ExperimentSpec& spec);

enum ReportFormat : unsigned {
    kReportCsv = 1u,
    kReportJson = 2u,
    kReportSvg = 4u,
    kReportAll = 7u,
};

/// Write report.json, summary.csv and plots/*.svg into out_dir per the
/// format mask. Deterministic byte-for-byte for equal reports.
void emit_report(const ExperimentReport& report,
                 const std::filesystem::path& out_dir,
                 unsigned formats = kReportAll);

/// The summary.csv body: one row per plane x variant x method x preproc x
/// degradation x d.
std::string report_csv(const ExperimentReport& report);

} // namespace slicefind

#endif
