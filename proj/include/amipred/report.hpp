#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "amipred/cohortstats.hpp"
#include "amipred/csv.hpp"
#include "amipred/evaluate.hpp"

namespace amipred {

inline std::string format_fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// p-values below the printable resolution render the way the paper prints
// them.
inline std::string format_p_value(double p) {
    if (p < 1e-5) return "<.00001";
    return format_fixed(p, 6);
}

// Table 2 analogue: subgroup counts, percentages, and chi-square columns.
inline void write_summary_table(const std::filesystem::path& path,
                                const std::vector<SummaryRow>& rows, const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    w.row({"characteristic", "subgroup", "n", "positives", "positive_pct", "negatives",
           "negative_pct", "chi_square", "p_value"});
    for (const auto& r : rows) {
        w.row({r.characteristic, r.subgroup, std::to_string(r.n), std::to_string(r.positives),
               format_fixed(r.positive_pct, 1), std::to_string(r.negatives),
               format_fixed(r.negative_pct, 1),
               r.chi_square.defined ? format_fixed(r.chi_square.statistic, 6) : "",
               r.chi_square.defined ? format_p_value(r.chi_square.p_value) : ""});
    }
    w.close();
}

inline void write_roc_csv(const std::filesystem::path& path, const std::vector<ROCPoint>& points,
                          const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    w.row({"fpr", "tpr", "threshold"});
    char buf[48];
    for (const auto& p : points) {
        std::vector<std::string> fields;
        std::snprintf(buf, sizeof(buf), "%.17g", p.fpr);
        fields.emplace_back(buf);
        std::snprintf(buf, sizeof(buf), "%.17g", p.tpr);
        fields.emplace_back(buf);
        std::snprintf(buf, sizeof(buf), "%.17g", p.threshold);
        fields.emplace_back(buf);
        w.row(fields);
    }
    w.close();
}

inline void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                              const std::string& dataset, const std::string& learner,
                              std::size_t k, std::uint64_t seed, const std::string& hash = {}) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write eval report: " + path.string());
    if (!hash.empty()) out << "# config_hash: " << hash << "\n";
    out << "dataset: " << dataset << "\n";
    out << "learner: " << learner << "\n";
    out << "folds: " << k << "\n";
    out << "seed: " << seed << "\n";
    const Metrics& m = report.pooled;
    out << "accuracy: " << format_fixed(100.0 * m.accuracy, 2) << "%\n";
    out << "auc: " << format_fixed(report.auc, 3) << "\n";
    out << "precision: " << format_fixed(m.precision, 3)
        << (m.precision_degenerate ? " (degenerate: no positive predictions)" : "") << "\n";
    out << "recall: " << format_fixed(m.recall, 3) << "\n";
    out << "f_measure: " << format_fixed(m.f_measure, 3) << "\n";
    out << "confusion: tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << " tn=" << m.tn << "\n";
    // per-fold mean and sd of accuracy alongside the pooled headline
    double mean = 0.0;
    for (const auto& f : report.per_fold) mean += f.metrics.accuracy;
    mean /= static_cast<double>(report.per_fold.size());
    double ss = 0.0;
    for (const auto& f : report.per_fold) {
        const double d = f.metrics.accuracy - mean;
        ss += d * d;
    }
    out << "fold_accuracy_mean: " << format_fixed(100.0 * mean, 2) << "%\n";
    out << "fold_accuracy_sd: "
        << format_fixed(100.0 * std::sqrt(ss / static_cast<double>(report.per_fold.size())), 2)
        << "%\n";
    for (const auto& f : report.per_fold) {
        out << "fold " << f.fold << ": accuracy=" << format_fixed(f.metrics.accuracy, 4)
            << " precision=" << format_fixed(f.metrics.precision, 4)
            << " recall=" << format_fixed(f.metrics.recall, 4) << " tp=" << f.metrics.tp
            << " fp=" << f.metrics.fp << " fn=" << f.metrics.fn << " tn=" << f.metrics.tn << "\n";
    }
    if (!out) throw DataError("write failed: " + path.string());
}

struct CompareRow {
    std::string dataset;
    std::string learner;
    Metrics metrics;
    double auc = 0.0;
};

// Table 3/4 analogue: one row per (dataset, learner).
inline void write_compare_csv(const std::filesystem::path& path,
                              const std::vector<CompareRow>& rows, const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    w.row({"dataset", "learner", "accuracy_pct", "auc", "precision", "recall", "f_measure"});
    for (const auto& r : rows)
        w.row({r.dataset, r.learner, format_fixed(100.0 * r.metrics.accuracy, 2),
               format_fixed(r.auc, 3), format_fixed(r.metrics.precision, 3),
               format_fixed(r.metrics.recall, 3), format_fixed(r.metrics.f_measure, 3)});
    w.close();
}

// Best row per dataset by accuracy, the shape of the paper's Table 3.
inline std::vector<CompareRow> best_by_dataset(const std::vector<CompareRow>& rows) {
    std::vector<CompareRow> best;
    for (const auto& r : rows) {
        bool found = false;
        for (auto& b : best)
            if (b.dataset == r.dataset) {
                found = true;
                if (r.metrics.accuracy > b.metrics.accuracy) b = r;
            }
        if (!found) best.push_back(r);
    }
    return best;
}

struct RocSeries {
    std::string name;
    std::vector<ROCPoint> points;
};

// Self-contained SVG line plot of one or more ROC curves (the Figure 1
// analogue). No external renderer involved.
inline void write_roc_svg(const std::filesystem::path& path, const std::vector<RocSeries>& series,
                          const std::string& title = "ROC") {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double width = 640, height = 520, margin = 60;
    const double plot_w = width - 2 * margin, plot_h = height - 2 * margin - 40;
    const auto sx = [&](double fpr) { return margin + fpr * plot_w; };
    const auto sy = [&](double tpr) { return margin + (1.0 - tpr) * plot_h; };

    std::ofstream out(path);
    if (!out) throw DataError("cannot write SVG: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double f = i / 5.0;
        out << "<line x1=\"" << sx(f) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(f) << "\" y2=\""
            << sy(1) << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(f) << "\" x2=\"" << sx(1) << "\" y2=\""
            << sy(f) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << sx(f) << "\" y=\"" << sy(0) + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_fixed(f, 1) << "</text>\n";
        out << "<text x=\"" << sx(0) - 8 << "\" y=\"" << sy(f) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_fixed(f, 1) << "</text>\n";
    }
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
        << sy(1) << "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 45
        << "\" text-anchor=\"middle\" font-size=\"13\">False positive rate</text>\n";
    out << "<text x=\"18\" y=\"" << margin + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << margin + plot_h / 2 << ")\">True positive rate</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (const auto& p : series[s].points) out << sx(p.fpr) << "," << sy(p.tpr) << " ";
        out << "\"/>\n";
        const double ly = height - 30 + 0;
        const double lx = margin + static_cast<double>(s) * (plot_w / static_cast<double>(series.size() ? series.size() : 1));
        out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 18 << "\" y2=\"" << ly
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << lx + 22 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">"
            << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw DataError("write failed: " + path.string());
}

// Ingested cohort echo, one row per case.
inline void write_cohort_csv(const std::filesystem::path& path,
                             const std::vector<AdmissionCase>& cases, const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    w.row({"admission_id", "patient_id", "age", "gender", "ethnicity", "religion",
           "marital_status", "admit_time", "total_days", "admission_month", "discharge_location",
           "er_initial_ami", "treatments", "comorbidity_groups", "label"});
    for (const auto& c : cases) {
        std::string treatments, groups;
        for (const auto& t : c.treatments) treatments += (treatments.empty() ? "" : ";") + t;
        for (const auto& g : c.comorbidity_groups) groups += (groups.empty() ? "" : ";") + g;
        w.row({c.admission.admission_id, c.patient.patient_id, format_fixed(c.age_at_admission, 2),
               c.patient.gender, c.admission.ethnicity, c.admission.religion,
               c.admission.marital_status, c.admission.admit_time.to_string(),
               format_fixed(c.admission.total_days, 4), std::to_string(c.admission.admission_month),
               c.admission.discharge_location, c.admission.er_initial_ami_flag ? "1" : "0",
               treatments, groups, std::to_string(label_value(c.label))});
    }
    w.close();
}

}  // namespace amipred
