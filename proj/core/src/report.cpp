#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "slicefind/error.hpp"
#include "slicefind/harness.hpp"

namespace slicefind {

namespace {

nlohmann::json outcome_to_json(const LocalizationOutcome& o) {
    return {{"query_index", o.query_index},
            {"expected_index", o.expected_index},
            {"best_index", o.best_index},
            {"best_index_raw", o.best_index_raw},
            {"peak_snr", o.peak_snr}};
}

LocalizationOutcome outcome_from_json(const nlohmann::json& j) {
    LocalizationOutcome o;
    o.query_index = j.at("query_index").get<int>();
    o.expected_index = j.at("expected_index").get<int>();
    o.best_index = j.at("best_index").get<int>();
    o.best_index_raw = j.at("best_index_raw").get<int>();
    o.peak_snr = j.at("peak_snr").get<double>();
    return o;
}

nlohmann::json subject_to_json(const SubjectOutcomes& s) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& o : s.outcomes) outcomes.push_back(outcome_to_json(o));
    return {{"subject", s.subject},
            {"outcomes", std::move(outcomes)},
            {"self_snr", s.self_snr},
            {"robustness", s.robustness},
            {"zero_baseline", s.zero_baseline},
            {"opposite_side", s.opposite_side}};
}

SubjectOutcomes subject_from_json(const nlohmann::json& j) {
    SubjectOutcomes s;
    s.subject = j.at("subject").get<std::string>();
    for (const auto& oj : j.at("outcomes"))
        s.outcomes.push_back(outcome_from_json(oj));
    s.self_snr = j.at("self_snr").get<std::vector<double>>();
    s.robustness = j.at("robustness").get<std::vector<double>>();
    s.zero_baseline = j.at("zero_baseline").get<std::vector<int>>();
    s.opposite_side = j.at("opposite_side").get<int>();
    return s;
}

nlohmann::json cell_to_json(const CellResult& c) {
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& s : c.subjects) subjects.push_back(subject_to_json(s));
    nlohmann::json acc = nlohmann::json::object();
    for (const auto& [d, a] : c.accuracy_by_d) acc[std::to_string(d)] = a;
    return {{"plane", c.plane},
            {"variant", c.variant},
            {"method", c.method},
            {"preproc", c.preproc},
            {"degradation", c.degradation},
            {"subjects", std::move(subjects)},
            {"accuracy_by_d", std::move(acc)},
            {"cumulative", c.cumulative},
            {"mean_snr", c.mean_snr},
            {"mean_self_snr", c.mean_self_snr},
            {"mean_robustness", c.mean_robustness},
            {"zero_baseline_excluded", c.zero_baseline_excluded},
            {"opposite_side_total", c.opposite_side_total}};
}

CellResult cell_from_json(const nlohmann::json& j) {
    CellResult c;
    c.plane = j.at("plane").get<std::string>();
    c.variant = j.at("variant").get<std::string>();
    c.method = j.at("method").get<std::string>();
    c.preproc = j.at("preproc").get<std::string>();
    c.degradation = j.at("degradation").get<std::string>();
    for (const auto& sj : j.at("subjects"))
        c.subjects.push_back(subject_from_json(sj));
    for (const auto& [key, value] : j.at("accuracy_by_d").items())
        c.accuracy_by_d[std::stoi(key)] = value.get<double>();
    c.cumulative = j.at("cumulative").get<long long>();
    c.mean_snr = j.at("mean_snr").get<double>();
    c.mean_self_snr = j.at("mean_self_snr").get<double>();
    c.mean_robustness = j.at("mean_robustness").get<double>();
    c.zero_baseline_excluded = j.at("zero_baseline_excluded").get<int>();
    c.opposite_side_total = j.at("opposite_side_total").get<int>();
    return c;
}

nlohmann::json curve_to_json(const CurveRecord& c) {
    return {{"method", c.method},       {"subject", c.subject},
            {"degradation", c.degradation}, {"slice_id", c.slice_id},
            {"start_index", c.start_index}, {"snr", c.snr},
            {"smoothed", c.smoothed}};
}

CurveRecord curve_from_json(const nlohmann::json& j) {
    CurveRecord c;
    c.method = j.at("method").get<std::string>();
    c.subject = j.at("subject").get<std::string>();
    c.degradation = j.at("degradation").get<std::string>();
    c.slice_id = j.at("slice_id").get<int>();
    c.start_index = j.at("start_index").get<int>();
    c.snr = j.at("snr").get<std::vector<double>>();
    c.smoothed = j.at("smoothed").get<std::vector<double>>();
    return c;
}

} // namespace

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json cells_j = nlohmann::json::array();
    for (const auto& c : cells) cells_j.push_back(cell_to_json(c));
    nlohmann::json curves_j = nlohmann::json::array();
    for (const auto& c : curves) curves_j.push_back(curve_to_json(c));
    return {{"spec", spec.to_json()},
            {"version", version},
            {"config_hash", config_hash},
            {"cells", std::move(cells_j)},
            {"curves", std::move(curves_j)},
            {"failures", failures}};
}

ExperimentReport ExperimentReport::from_json(const nlohmann::json& j) {
    ExperimentReport r;
    try {
        r.spec = ExperimentSpec::from_json(j.at("spec"));
        r.version = j.at("version").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& cj : j.at("cells"))
            r.cells.push_back(cell_from_json(cj));
        for (const auto& cj : j.at("curves"))
            r.curves.push_back(curve_from_json(cj));
        r.failures = j.at("failures").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::schema_error, std::string("report: ") + e.what());
    }
    return r;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string report_csv(const ExperimentReport& report) {
    std::string csv =
        "plane,variant,method,preproc,degradation,d,accuracy,cumulative,"
        "mean_snr,mean_self_snr,mean_robustness,zero_baseline_excluded,"
        "opposite_side,outcomes\n";
    for (const auto& cell : report.cells) {
        std::size_t n = 0;
        for (const auto& s : cell.subjects) n += s.outcomes.size();
        for (const auto& [d, a] : cell.accuracy_by_d) {
            csv += cell.plane + ',' + cell.variant + ',' + cell.method + ',' +
                   cell.preproc + ',' + cell.degradation + ',' +
                   std::to_string(d) + ',' + fmt(a) + ',' +
                   std::to_string(cell.cumulative) + ',' +
                   fmt(cell.mean_snr) + ',' + fmt(cell.mean_self_snr) + ',' +
                   fmt(cell.mean_robustness) + ',' +
                   std::to_string(cell.zero_baseline_excluded) + ',' +
                   std::to_string(cell.opposite_side_total) + ',' +
                   std::to_string(n) + '\n';
        }
    }
    return csv;
}

// ---------------------------------------------------------------------------
// SVG plots

namespace {

constexpr double kW = 640, kH = 400;
constexpr double kMargin = 52;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

class Svg {
public:
    Svg() {
        buf_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                num(kW) + "\" height=\"" + num(kH) + "\" viewBox=\"0 0 " +
                num(kW) + " " + num(kH) + "\">\n";
        buf_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2,
              const char* stroke = "#333", double width = 1.0) {
        buf_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
                num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke +
                "\" stroke-width=\"" + num(width) + "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const char* stroke, double width = 1.5) {
        if (pts.empty()) return;
        buf_ += "<polyline fill=\"none\" stroke=\"";
        buf_ += stroke;
        buf_ += "\" stroke-width=\"" + num(width) + "\" points=\"";
        for (const auto& [x, y] : pts)
            buf_ += num(x) + "," + num(y) + " ";
        buf_ += "\"/>\n";
    }

    void circle(double cx, double cy, double r, const char* fill,
                double opacity = 1.0) {
        buf_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" +
                num(r) + "\" fill=\"" + fill + "\" fill-opacity=\"" +
                num(opacity) + "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char* fill) {
        buf_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
                num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill +
                "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12,
              const char* anchor = "start") {
        buf_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
                "\" font-family=\"sans-serif\" font-size=\"" +
                std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" +
                s + "</text>\n";
    }

    std::string finish() { return buf_ + "</svg>\n"; }

private:
    std::string buf_;
};

struct Axes {
    double x_min, x_max, y_min, y_max;

    double sx(double x) const {
        const double span = x_max > x_min ? x_max - x_min : 1.0;
        return kMargin + (x - x_min) / span * (kW - 2 * kMargin);
    }
    double sy(double y) const {
        const double span = y_max > y_min ? y_max - y_min : 1.0;
        return kH - kMargin - (y - y_min) / span * (kH - 2 * kMargin);
    }

    void draw(Svg& svg, const std::string& title, const std::string& x_label,
              const std::string& y_label) const {
        svg.line(kMargin, kH - kMargin, kW - kMargin, kH - kMargin);
        svg.line(kMargin, kMargin, kMargin, kH - kMargin);
        svg.text(kW / 2, 20, title, 14, "middle");
        svg.text(kW / 2, kH - 12, x_label, 12, "middle");
        svg.text(14, kH / 2, y_label, 12, "middle");
        svg.text(kMargin, kH - kMargin + 16, num(x_min), 10, "middle");
        svg.text(kW - kMargin, kH - kMargin + 16, num(x_max), 10, "middle");
        svg.text(kMargin - 6, kH - kMargin + 4, num(y_min), 10, "end");
        svg.text(kMargin - 6, kMargin + 4, num(y_max), 10, "end");
    }
};

Axes fit_axes(double x_min, double x_max, double y_min, double y_max) {
    if (y_max <= y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    } else {
        const double pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    return {x_min, x_max, y_min, y_max};
}

std::string slug(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' &&
            c != '_')
            c = '-';
    return s;
}

std::string cell_slug(const CellResult& c) {
    std::string s = c.plane + "_" + c.method + "_" + c.preproc + "_" +
                    c.degradation;
    if (!c.variant.empty()) s += "_" + c.variant;
    return slug(s);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_failure, "cannot write " + path.string());
    out << body;
}

void plot_curve(const CurveRecord& c, const std::filesystem::path& dir) {
    double lo = 0.0, hi = 0.0;
    for (double v : c.snr) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : c.smoothed) { lo = std::min(lo, v); hi = std::max(hi, v); }
    const double x_max = c.start_index + static_cast<double>(c.snr.size()) - 1;
    const Axes ax = fit_axes(c.start_index, x_max, lo, hi);

    Svg svg;
    ax.draw(svg, c.method + " " + c.subject + " slice " +
                     std::to_string(c.slice_id) + " (" + c.degradation + ")",
            "reference index", "SNR");
    std::vector<std::pair<double, double>> raw, smooth;
    for (size_t i = 0; i < c.snr.size(); ++i) {
        const double x = c.start_index + static_cast<double>(i);
        raw.emplace_back(ax.sx(x), ax.sy(c.snr[i]));
        smooth.emplace_back(ax.sx(x), ax.sy(c.smoothed[i]));
    }
    svg.polyline(raw, "#9ecae1", 1.0);
    svg.polyline(smooth, "#08519c", 1.8);
    svg.line(ax.sx(c.slice_id), kMargin, ax.sx(c.slice_id), kH - kMargin,
             "#d62728", 0.8);

    write_file(dir / ("snr_" +
                      slug(c.method + "_" + c.subject + "_" + c.degradation +
                           "_slice" + std::to_string(c.slice_id)) +
                      ".svg"),
               svg.finish());
}

void plot_robustness(const CellResult& cell, const SubjectOutcomes& s,
                     const std::filesystem::path& dir) {
    // x = query index of each non-excluded outcome, y = its R value
    std::vector<std::pair<double, double>> pts;
    size_t r = 0;
    for (const auto& o : s.outcomes) {
        const bool excluded =
            std::find(s.zero_baseline.begin(), s.zero_baseline.end(),
                      o.query_index) != s.zero_baseline.end();
        if (excluded) continue;
        if (r >= s.robustness.size()) break;
        pts.emplace_back(o.query_index, s.robustness[r++]);
    }
    if (pts.empty()) return;

    double lo = 1.0, hi = 1.0;
    for (const auto& [x, y] : pts) { lo = std::min(lo, y); hi = std::max(hi, y); }
    const Axes ax = fit_axes(pts.front().first, pts.back().first, lo, hi);
    Svg svg;
    ax.draw(svg, cell.method + " " + s.subject + " " + cell.degradation,
            "query index", "robustness");
    svg.line(kMargin, ax.sy(1.0), kW - kMargin, ax.sy(1.0), "#bbbbbb", 0.8);
    std::vector<std::pair<double, double>> screen;
    for (const auto& [x, y] : pts) screen.emplace_back(ax.sx(x), ax.sy(y));
    svg.polyline(screen, "#2ca02c", 1.5);

    write_file(dir / ("robustness_" +
                      slug(cell_slug(cell) + "_" + s.subject) + ".svg"),
               svg.finish());
}

void plot_scatter(const CellResult& cell, const std::vector<int>& d_values,
                  const std::filesystem::path& dir) {
    const auto outcomes = cell.all_outcomes();
    if (outcomes.empty()) return;
    double d_max = 1.0, s_lo = 0.0, s_hi = 0.0;
    for (const auto* o : outcomes) {
        d_max = std::max(d_max, static_cast<double>(o->distance()));
        s_lo = std::min(s_lo, o->peak_snr);
        s_hi = std::max(s_hi, o->peak_snr);
    }
    const Axes ax = fit_axes(0.0, d_max, s_lo, s_hi);
    Svg svg;
    ax.draw(svg, cell.method + " / " + cell.preproc, "|expected - best|",
            "peak SNR");
    for (const auto* o : outcomes)
        svg.circle(ax.sx(o->distance()), ax.sy(o->peak_snr), 3.0, "#1f77b4",
                   0.6);
    const int d0 = d_values.empty() ? 5 : d_values.front();
    const auto it = cell.accuracy_by_d.find(d0);
    std::string note = "C=" + std::to_string(cell.cumulative);
    if (it != cell.accuracy_by_d.end())
        note = "A" + std::to_string(d0) + "=" + num(it->second) + "  " + note;
    svg.text(kW - kMargin, kMargin - 8, note, 12, "end");

    write_file(dir / ("scatter_" + cell_slug(cell) + ".svg"), svg.finish());
}

void plot_bars(const CellResult& cell, const std::vector<int>& d_values,
               const std::filesystem::path& dir) {
    const auto outcomes = cell.all_outcomes();
    if (outcomes.empty()) return;
    const int d0 = d_values.empty() ? 5 : d_values.front();

    Svg svg;
    svg.text(kW / 2, 20,
             cell.method + " / " + cell.preproc + " correct within " +
                 std::to_string(d0),
             14, "middle");
    const double strip_w = (kW - 2 * kMargin) / outcomes.size();
    for (size_t i = 0; i < outcomes.size(); ++i)
        svg.rect(kMargin + i * strip_w, kMargin, strip_w, kH - 2 * kMargin,
                 outcomes[i]->correct_within(d0) ? "#2ca02c" : "#d62728");
    svg.text(kMargin, kH - kMargin + 16,
             std::to_string(outcomes.front()->query_index), 10, "middle");
    svg.text(kW - kMargin, kH - kMargin + 16,
             std::to_string(outcomes.back()->query_index), 10, "middle");

    write_file(dir / ("bars_" + cell_slug(cell) + ".svg"), svg.finish());
}

void plot_bubbles(const ExperimentReport& report,
                  const std::filesystem::path& dir) {
    if (report.cells.empty()) return;
    const int d0 =
        report.spec.d_values.empty() ? 5 : report.spec.d_values.front();
    double c_max = 1.0, snr_max = 0.0;
    for (const auto& cell : report.cells) {
        c_max = std::max(c_max, static_cast<double>(cell.cumulative));
        snr_max = std::max(snr_max, cell.mean_snr);
    }
    const Axes ax = fit_axes(0.0, 1.0, 0.0, c_max);
    Svg svg;
    ax.draw(svg, "cumulative distance vs accuracy (bubble = mean SNR)",
            "A" + std::to_string(d0), "C");
    for (const auto& cell : report.cells) {
        const auto it = cell.accuracy_by_d.find(d0);
        if (it == cell.accuracy_by_d.end()) continue;
        const double r =
            snr_max > 0.0 ? 4.0 + 14.0 * (cell.mean_snr / snr_max) : 6.0;
        svg.circle(ax.sx(it->second),
                   ax.sy(static_cast<double>(cell.cumulative)), r, "#1f77b4",
                   0.45);
        svg.text(ax.sx(it->second),
                 ax.sy(static_cast<double>(cell.cumulative)) - r - 2,
                 cell.method + "/" + cell.preproc, 9, "middle");
    }
    write_file(dir / "summary_bubbles.svg", svg.finish());
}

} // namespace

void emit_report(const ExperimentReport& report,
                 const std::filesystem::path& out_dir, unsigned formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    if (formats & kReportJson)
        write_file(out_dir / "report.json", report.to_json().dump(2) + "\n");
    if (formats & kReportCsv)
        write_file(out_dir / "summary.csv", report_csv(report));
    if (formats & kReportSvg) {
        const auto plots = out_dir / "plots";
        std::filesystem::create_directories(plots, ec);
        for (const auto& curve : report.curves) plot_curve(curve, plots);
        for (const auto& cell : report.cells) {
            plot_scatter(cell, report.spec.d_values, plots);
            plot_bars(cell, report.spec.d_values, plots);
            if (cell.degradation != "none")
                for (const auto& s : cell.subjects)
                    if (!s.robustness.empty()) plot_robustness(cell, s, plots);
        }
        plot_bubbles(report, plots);
    }
}

} // namespace slicefind
