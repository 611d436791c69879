#include <algorithm>
#include <cstdio>

#include "detail/mix.hpp"
#include "slicefind/error.hpp"
#include "slicefind/harness.hpp"
#include "slicefind/version.hpp"

namespace slicefind {

std::vector<const LocalizationOutcome*> CellResult::all_outcomes() const {
    std::vector<const LocalizationOutcome*> out;
    for (const auto& s : subjects)
        for (const auto& o : s.outcomes) out.push_back(&o);
    return out;
}

void CellResult::recompute_aggregates(const std::vector<int>& d_values) {
    std::vector<LocalizationOutcome> pooled;
    for (const auto& s : subjects)
        pooled.insert(pooled.end(), s.outcomes.begin(), s.outcomes.end());

    accuracy_by_d.clear();
    for (int d : d_values) accuracy_by_d[d] = accuracy(pooled, d);
    cumulative = cumulative_distance(pooled);

    double peak_sum = 0.0;
    for (const auto& o : pooled) peak_sum += o.peak_snr;
    mean_snr = peak_sum / static_cast<double>(pooled.size());

    double self_sum = 0.0;
    std::size_t self_n = 0;
    double rob_sum = 0.0;
    std::size_t rob_n = 0;
    zero_baseline_excluded = 0;
    opposite_side_total = 0;
    for (const auto& s : subjects) {
        for (double v : s.self_snr) self_sum += v;
        self_n += s.self_snr.size();
        for (double v : s.robustness) rob_sum += v;
        rob_n += s.robustness.size();
        zero_baseline_excluded += static_cast<int>(s.zero_baseline.size());
        opposite_side_total += s.opposite_side;
    }
    mean_self_snr = self_n ? self_sum / static_cast<double>(self_n) : 0.0;
    mean_robustness = rob_n ? rob_sum / static_cast<double>(rob_n) : 0.0;
}

namespace {

struct LoadedStack {
    StackRef ref;
    SliceStack stack;
};

std::vector<LoadedStack> load_all(const ExperimentSpec& spec) {
    std::vector<LoadedStack> out;
    for (const auto& ref : spec.stacks) {
        LoadedStack ls;
        ls.ref = ref;
        ls.stack = load_stack(spec.base_dir / ref.manifest);
        ls.stack.subject_id = ref.subject; // spec subject labels win
        out.push_back(std::move(ls));
    }
    return out;
}

/// Lazy per-(method,stack) feature cache; external methods pull every slice
/// from the store instead of detecting.
class FeatureCache {
public:
    FeatureCache(const FeatureStore* store, const ExperimentSpec& spec)
        : store_(store), spec_(spec) {}

    const StackFeatures& get(const LoadedStack& ls, const MethodSpec& method) {
        const auto key = std::make_pair(ls.ref.subject, method.name());
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        StackFeatures f;
        if (method.is_external()) {
            if (!store_)
                raise(Errc::missing_feature,
                      "method " + method.name() +
                          " needs features_dir in the experiment spec");
            f.subject = ls.stack.subject_id;
            f.start_index = ls.stack.start_index;
            for (int p = 0; p < ls.stack.size(); ++p)
                f.sets.push_back(store_->get(ls.ref.subject,
                                             ls.stack.index_of(p),
                                             method.external_name));
        } else {
            f = compute_stack_features(ls.stack, method);
        }
        return cache_.emplace(key, std::move(f)).first->second;
    }

private:
    const FeatureStore* store_;
    const ExperimentSpec& spec_;
    std::map<std::pair<std::string, std::string>, StackFeatures> cache_;
};

LocatorConfig make_locator_config(const MethodSpec& method,
                                  const std::string& preproc, int window) {
    LocatorConfig cfg;
    cfg.method = method;
    cfg.preproc = PreprocSpec::parse(preproc);
    cfg.window = window;
    return cfg;
}

/// locate_all for store-backed pipelines: query descriptors come from the
/// feature store instead of detection; preprocessing does not apply.
std::vector<LocalizationOutcome>
locate_all_store(const FeatureStore& store, const MethodSpec& method,
                 const std::string& query_subject,
                 const SliceStack& query_stack, const StackFeatures& refs,
                 int window, const LocateAllOptions& options,
                 std::vector<SnrSeries>* series_out) {
    std::vector<int> positions;
    for (int p = 0; p < query_stack.size(); ++p) {
        const int idx = query_stack.index_of(p);
        if (options.query_range && (idx < options.query_range->first ||
                                    idx > options.query_range->last))
            continue;
        positions.push_back(p);
    }

    const int n_ref = refs.size();
    std::vector<LocalizationOutcome> outcomes(positions.size());
    if (series_out) series_out->resize(positions.size());

    for (size_t qi = 0; qi < positions.size(); ++qi) {
        const int query_index = query_stack.index_of(positions[qi]);
        const int expected = options.index_map.map(query_index);
        Hemisphere hemi = Hemisphere::none;
        if (options.hemisphere_from_expected) {
            const int expected_pos = expected - refs.start_index;
            hemi = expected_pos < n_ref / 2 ? Hemisphere::left
                                            : Hemisphere::right;
        }
        const DescriptorSet& qset =
            store.get(query_subject, query_index, method.external_name);
        LocateResult r =
            locate_series(qset, refs, method.filter, window, hemi);

        LocalizationOutcome& o = outcomes[qi];
        o.query_index = query_index;
        o.expected_index = expected;
        o.best_index = r.best_index;
        o.best_index_raw = r.best_index_raw;
        o.peak_snr = r.series.smoothed[r.best_index - refs.start_index];
        if (series_out) {
            r.series.query_index = query_index;
            (*series_out)[qi] = std::move(r.series);
        }
    }
    return outcomes;
}

SubjectOutcomes assemble_subject(const std::string& subject,
                                 std::vector<LocalizationOutcome> outcomes,
                                 const std::vector<SnrSeries>& series,
                                 int ref_start, int n_ref, bool sagittal) {
    SubjectOutcomes so;
    so.subject = subject;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        const int pos = o.expected_index - ref_start;
        if (pos >= 0 && pos < n_ref) so.self_snr.push_back(series[i].snr[pos]);
        if (sagittal) {
            const bool expected_left = pos < n_ref / 2;
            const bool best_left = (o.best_index - ref_start) < n_ref / 2;
            if (expected_left != best_left) ++so.opposite_side;
        }
    }
    so.outcomes = std::move(outcomes);
    return so;
}

void add_curves(ExperimentReport& report, const ExperimentSpec& spec,
                const std::string& method, const std::string& subject,
                const std::string& degradation,
                const std::vector<LocalizationOutcome>& outcomes,
                const std::vector<SnrSeries>& series, int ref_start) {
    for (int id : spec.plot_slice_ids)
        for (size_t i = 0; i < outcomes.size(); ++i)
            if (outcomes[i].query_index == id) {
                CurveRecord c;
                c.method = method;
                c.subject = subject;
                c.degradation = degradation;
                c.slice_id = id;
                c.start_index = ref_start;
                c.snr = series[i].snr;
                c.smoothed = series[i].smoothed;
                report.curves.push_back(std::move(c));
            }
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

ExperimentReport make_report(const ExperimentSpec& spec) {
    ExperimentReport report;
    report.spec = spec;
    report.version = kVersion;
    report.config_hash = hash_hex(spec.config_hash());
    return report;
}

void finish_cell(ExperimentReport& report, CellResult cell,
                 const ExperimentSpec& spec, const std::string& where) {
    bool any = false;
    for (const auto& s : cell.subjects) any = any || !s.outcomes.empty();
    if (!any) {
        report.failures.push_back(where + ": no localization outcomes");
        return;
    }
    cell.recompute_aggregates(spec.d_values);
    report.cells.push_back(std::move(cell));
}

std::optional<FeatureStore> open_store(const ExperimentSpec& spec) {
    if (spec.features_dir.empty()) return std::nullopt;
    FeatureStore store;
    store.ingest(spec.base_dir / spec.features_dir);
    return store;
}

} // namespace

ExperimentReport run_identity(const ExperimentSpec& spec) {
    ExperimentReport report = make_report(spec);
    const auto stacks = load_all(spec);
    const auto store = open_store(spec);
    FeatureCache cache(store ? &*store : nullptr, spec);

    for (const auto& method_name : spec.methods) {
        const MethodSpec method = MethodSpec::parse(method_name);
        for (const auto& preproc : spec.preprocs) {
            if (method.is_external() && preproc != "none") continue;

            // one cell per plane, subjects pooled within it
            std::map<std::string, CellResult> by_plane;
            for (const auto& ls : stacks) {
                const std::string where = "identity/" + method_name + "/" +
                                          preproc + "/" + ls.ref.subject;
                try {
                    const StackFeatures& feats = cache.get(ls, method);
                    LocateAllOptions options;
                    options.index_map = spec.index_map;
                    options.query_range = spec.query_range;

                    std::vector<SnrSeries> series;
                    std::vector<LocalizationOutcome> outcomes;
                    if (method.is_external())
                        outcomes = locate_all_store(
                            *store, method, ls.ref.subject, ls.stack, feats,
                            spec.window, options, &series);
                    else
                        outcomes = locate_all(
                            ls.stack, feats, ls.stack,
                            make_locator_config(method, preproc, spec.window),
                            options, &series);

                    if (preproc == "none")
                        add_curves(report, spec, method_name, ls.ref.subject,
                                   "none", outcomes, series,
                                   feats.start_index);

                    const std::string plane = to_string(ls.stack.plane);
                    auto& cell = by_plane[plane];
                    cell.plane = plane;
                    cell.method = method_name;
                    cell.preproc = preproc;
                    cell.subjects.push_back(assemble_subject(
                        ls.ref.subject, std::move(outcomes), series,
                        feats.start_index, feats.size(),
                        ls.stack.plane == Plane::sagittal));
                } catch (const std::exception& e) {
                    report.failures.push_back(where + ": " + e.what());
                }
            }
            for (auto& [plane, cell] : by_plane)
                finish_cell(report, std::move(cell), spec,
                            "identity/" + method_name + "/" + preproc + "/" +
                                plane);
        }
    }
    return report;
}

ExperimentReport run_robustness(const ExperimentSpec& spec) {
    if (spec.degradations.empty())
        raise(Errc::invalid_argument,
              "robustness experiment needs degradations");
    ExperimentReport report = make_report(spec);
    const auto stacks = load_all(spec);
    const auto store = open_store(spec);
    FeatureCache cache(store ? &*store : nullptr, spec);

    for (const auto& method_name : spec.methods) {
        const MethodSpec method = MethodSpec::parse(method_name);
        if (method.is_external()) {
            report.failures.push_back(
                "robustness/" + method_name +
                ": external pipelines have no descriptors for degraded "
                "images");
            continue;
        }
        for (const auto& preproc : spec.preprocs) {
            const LocatorConfig cfg =
                make_locator_config(method, preproc, spec.window);
            LocateAllOptions options;
            options.index_map = spec.index_map;
            options.query_range = spec.query_range;

            // clean pass per stack: the R_x denominator and the "none" cell
            struct CleanPass {
                std::vector<LocalizationOutcome> outcomes;
                std::vector<SnrSeries> series;
                std::vector<double> self_snr; // aligned with outcomes
            };
            std::map<std::string, CleanPass> clean;
            std::map<std::string, CellResult> baseline_by_plane;

            for (const auto& ls : stacks) {
                const std::string where = "robustness/" + method_name + "/" +
                                          preproc + "/none/" + ls.ref.subject;
                try {
                    const StackFeatures& feats = cache.get(ls, method);
                    CleanPass pass;
                    pass.outcomes = locate_all(ls.stack, feats, ls.stack, cfg,
                                               options, &pass.series);
                    for (size_t i = 0; i < pass.outcomes.size(); ++i) {
                        const int pos = pass.outcomes[i].expected_index -
                                        feats.start_index;
                        pass.self_snr.push_back(
                            pos >= 0 && pos < feats.size()
                                ? pass.series[i].snr[pos]
                                : 0.0);
                    }
                    if (preproc == "none")
                        add_curves(report, spec, method_name, ls.ref.subject,
                                   "none", pass.outcomes, pass.series,
                                   feats.start_index);

                    SubjectOutcomes so = assemble_subject(
                        ls.ref.subject, pass.outcomes, pass.series,
                        feats.start_index, feats.size(),
                        ls.stack.plane == Plane::sagittal);
                    for (size_t i = 0; i < pass.outcomes.size(); ++i) {
                        if (pass.self_snr[i] == 0.0)
                            so.zero_baseline.push_back(
                                pass.outcomes[i].query_index);
                        else
                            so.robustness.push_back(1.0);
                    }
                    const std::string plane = to_string(ls.stack.plane);
                    auto& cell = baseline_by_plane[plane];
                    cell.plane = plane;
                    cell.method = method_name;
                    cell.preproc = preproc;
                    cell.degradation = "none";
                    cell.subjects.push_back(std::move(so));
                    clean.emplace(ls.ref.subject, std::move(pass));
                } catch (const std::exception& e) {
                    report.failures.push_back(where + ": " + e.what());
                }
            }
            for (auto& [plane, cell] : baseline_by_plane)
                finish_cell(report, std::move(cell), spec,
                            "robustness/" + method_name + "/" + preproc +
                                "/none/" + plane);

            for (const auto& deg : spec.degradations) {
                std::map<std::string, CellResult> by_plane;
                for (const auto& ls : stacks) {
                    const std::string where =
                        "robustness/" + method_name + "/" + preproc + "/" +
                        deg.label() + "/" + ls.ref.subject;
                    const auto clean_it = clean.find(ls.ref.subject);
                    if (clean_it == clean.end()) continue; // clean pass failed
                    try {
                        const StackFeatures& feats = cache.get(ls, method);

                        SliceStack degraded = ls.stack;
                        for (int p = 0; p < degraded.size(); ++p) {
                            Degradation d = deg;
                            if (d.kind == DegradationKind::noise)
                                d.seed = detail::mix(
                                    detail::mix(spec.seed, deg.seed),
                                    static_cast<std::uint64_t>(p) + 1);
                            degraded.slices[p] = apply(d, degraded.slices[p]);
                        }

                        std::vector<SnrSeries> series;
                        auto outcomes = locate_all(degraded, feats, ls.stack,
                                                   cfg, options, &series);
                        if (preproc == "none")
                            add_curves(report, spec, method_name,
                                       ls.ref.subject, deg.label(), outcomes,
                                       series, feats.start_index);

                        SubjectOutcomes so = assemble_subject(
                            ls.ref.subject, outcomes, series,
                            feats.start_index, feats.size(),
                            ls.stack.plane == Plane::sagittal);
                        const auto& cp = clean_it->second;
                        for (size_t i = 0; i < outcomes.size(); ++i) {
                            const double base = cp.self_snr[i];
                            const int pos = outcomes[i].expected_index -
                                            feats.start_index;
                            const double deg_self =
                                pos >= 0 && pos < feats.size()
                                    ? series[i].snr[pos]
                                    : 0.0;
                            if (base == 0.0)
                                so.zero_baseline.push_back(
                                    outcomes[i].query_index);
                            else
                                so.robustness.push_back(
                                    robustness(deg_self, base));
                        }
                        const std::string plane = to_string(ls.stack.plane);
                        auto& cell = by_plane[plane];
                        cell.plane = plane;
                        cell.method = method_name;
                        cell.preproc = preproc;
                        cell.degradation = deg.label();
                        cell.subjects.push_back(std::move(so));
                    } catch (const std::exception& e) {
                        report.failures.push_back(where + ": " + e.what());
                    }
                }
                for (auto& [plane, cell] : by_plane)
                    finish_cell(report, std::move(cell), spec,
                                "robustness/" + method_name + "/" + preproc +
                                    "/" + deg.label() + "/" + plane);
            }
        }
    }
    return report;
}

namespace {

ExperimentReport run_reference_experiment(const ExperimentSpec& spec,
                                          bool atlas) {
    ExperimentReport report = make_report(spec);
    const auto stacks = load_all(spec);
    const auto store = open_store(spec);
    FeatureCache cache(store ? &*store : nullptr, spec);
    const char* kind_name = atlas ? "atlas" : "cross_patient";

    const LoadedStack* reference = nullptr;
    for (const auto& ls : stacks) {
        if (ls.ref.role != "reference") continue;
        if (reference)
            raise(Errc::invalid_argument,
                  "exactly one stack may have role 'reference'");
        reference = &ls;
    }
    if (!reference)
        raise(Errc::invalid_argument,
              "experiment needs a stack with role 'reference'");

    const bool sagittal = reference->stack.plane == Plane::sagittal;
    std::vector<std::string> variants{""};
    if (atlas && sagittal && spec.hemisphere_restriction)
        variants.push_back("restricted");

    for (const auto& method_name : spec.methods) {
        const MethodSpec method = MethodSpec::parse(method_name);
        for (const auto& preproc : spec.preprocs) {
            if (method.is_external() && preproc != "none") continue;
            for (const auto& variant : variants) {
                CellResult cell;
                cell.plane = to_string(reference->stack.plane);
                cell.variant = variant;
                cell.method = method_name;
                cell.preproc = preproc;

                for (const auto& ls : stacks) {
                    if (ls.ref.role == "reference") continue;
                    const std::string where =
                        std::string(kind_name) + "/" + method_name + "/" +
                        preproc +
                        (variant.empty() ? std::string() : "/" + variant) +
                        "/" + ls.ref.subject;
                    if (ls.stack.plane != reference->stack.plane) {
                        report.failures.push_back(
                            where + ": query plane " +
                            to_string(ls.stack.plane) +
                            " does not match reference plane " +
                            to_string(reference->stack.plane));
                        continue;
                    }
                    try {
                        const StackFeatures& feats =
                            cache.get(*reference, method);
                        LocateAllOptions options;
                        options.index_map = spec.index_map;
                        options.query_range = spec.query_range;
                        options.hemisphere_from_expected =
                            variant == "restricted";

                        std::vector<SnrSeries> series;
                        std::vector<LocalizationOutcome> outcomes;
                        if (method.is_external())
                            outcomes = locate_all_store(
                                *store, method, ls.ref.subject, ls.stack,
                                feats, spec.window, options, &series);
                        else
                            outcomes = locate_all(
                                ls.stack, feats, reference->stack,
                                make_locator_config(method, preproc,
                                                    spec.window),
                                options, &series);

                        if (preproc == "none" && variant.empty())
                            add_curves(report, spec, method_name,
                                       ls.ref.subject, "none", outcomes,
                                       series, feats.start_index);

                        cell.subjects.push_back(assemble_subject(
                            ls.ref.subject, std::move(outcomes), series,
                            feats.start_index, feats.size(), sagittal));
                    } catch (const std::exception& e) {
                        report.failures.push_back(where + ": " + e.what());
                    }
                }
                finish_cell(report, std::move(cell), spec,
                            std::string(kind_name) + "/" + method_name + "/" +
                                preproc +
                                (variant.empty() ? std::string()
                                                 : "/" + variant));
            }
        }
    }
    return report;
}

} // namespace

ExperimentReport run_cross_patient(const ExperimentSpec& spec) {
    return run_reference_experiment(spec, false);
}

ExperimentReport run_atlas(const ExperimentSpec& spec) {
    return run_reference_experiment(spec, true);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.kind) {
    case ExperimentKind::identity: return run_identity(spec);
    case ExperimentKind::robustness: return run_robustness(spec);
    case ExperimentKind::cross_patient: return run_cross_patient(spec);
    case ExperimentKind::atlas: return run_atlas(spec);
    }
    raise(Errc::invalid_argument, "unknown experiment kind");
}

} // namespace slicefind
