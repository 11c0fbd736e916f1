#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "amipred/ingest.hpp"

namespace amipred {

struct PlausibilityRange {
    int item_id = 0;
    double min = 0.0;
    double max = 0.0;
};

struct CleanConfig {
    std::vector<PlausibilityRange> ranges;
    bool remove_outliers = false;  // the paper's results kept outliers
    std::optional<int> systolic_item;
    std::optional<int> diastolic_item;
};

struct CleanReport {
    long long lab_zero_removed = 0;
    long long lab_implausible_removed = 0;
    long long chart_implausible_removed = 0;
    long long bp_pairs_swapped = 0;
    long long lab_outliers_removed = 0;
    long long duplicate_diagnosis_rows = 0;
    long long duplicate_drg_rows = 0;

    std::vector<std::pair<std::string, long long>> rows() const {
        return {{"lab_zero_removed", lab_zero_removed},
                {"lab_implausible_removed", lab_implausible_removed},
                {"chart_implausible_removed", chart_implausible_removed},
                {"bp_pairs_swapped", bp_pairs_swapped},
                {"lab_outliers_removed", lab_outliers_removed},
                {"duplicate_diagnosis_rows", duplicate_diagnosis_rows},
                {"duplicate_drg_rows", duplicate_drg_rows}};
    }
};

struct CleanedEvents {
    std::vector<EventRow> lab_events;
    std::vector<EventRow> chart_events;
    CleanReport report;
};

namespace detail {

inline std::unordered_map<int, PlausibilityRange> range_index(const CleanConfig& config) {
    std::unordered_map<int, PlausibilityRange> idx;
    for (const auto& r : config.ranges) {
        if (!(r.min < r.max))
            throw ConfigError("plausibility range for item " + std::to_string(r.item_id) +
                              " has min >= max");
        idx[r.item_id] = r;
    }
    return idx;
}

}  // namespace detail

// The paper's entry-error rules: zero lab values dropped, values outside
// their plausibility range dropped, and blood-pressure pairs entered in
// reverse order swapped back. Values are never altered except the swap.
inline CleanedEvents clean_events(std::vector<EventRow> lab_events,
                                  std::vector<EventRow> chart_events, const CleanConfig& config) {
    CleanedEvents out;
    const auto ranges = detail::range_index(config);

    for (auto& e : lab_events) {
        if (e.value == 0.0) {
            ++out.report.lab_zero_removed;
            continue;
        }
        if (auto it = ranges.find(e.item_id);
            it != ranges.end() && (e.value < it->second.min || e.value > it->second.max)) {
            ++out.report.lab_implausible_removed;
            continue;
        }
        out.lab_events.push_back(std::move(e));
    }

    // Swap reversed pairs before the range screen so a corrected pair is
    // judged on its corrected values.
    if (config.systolic_item && config.diastolic_item) {
        std::map<std::pair<std::string, std::int64_t>, std::vector<std::size_t>> sys_at, dia_at;
        for (std::size_t i = 0; i < chart_events.size(); ++i) {
            const auto& e = chart_events[i];
            if (e.item_id == *config.systolic_item)
                sys_at[{e.admission_id, e.timestamp.seconds()}].push_back(i);
            else if (e.item_id == *config.diastolic_item)
                dia_at[{e.admission_id, e.timestamp.seconds()}].push_back(i);
        }
        for (const auto& [key, sys_idx] : sys_at) {
            auto dia_it = dia_at.find(key);
            if (dia_it == dia_at.end()) continue;
            const std::size_t n = std::min(sys_idx.size(), dia_it->second.size());
            for (std::size_t k = 0; k < n; ++k) {
                double& sys = chart_events[sys_idx[k]].value;
                double& dia = chart_events[dia_it->second[k]].value;
                if (dia > sys) {
                    std::swap(sys, dia);
                    ++out.report.bp_pairs_swapped;
                }
            }
        }
    }

    for (auto& e : chart_events) {
        if (auto it = ranges.find(e.item_id);
            it != ranges.end() && (e.value < it->second.min || e.value > it->second.max)) {
            ++out.report.chart_implausible_removed;
            continue;
        }
        out.chart_events.push_back(std::move(e));
    }
    return out;
}

// Quartile by linear interpolation between order statistics at position
// q * (n - 1) of the sorted sample.
inline double quartile(const std::vector<double>& sorted_values, double q) {
    const std::size_t n = sorted_values.size();
    if (n == 0) throw DataError("quartile of empty sample");
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted_values[n - 1];
    return sorted_values[lo] * (1.0 - frac) + sorted_values[lo + 1] * frac;
}

struct IqrFences {
    double lower = 0.0;
    double upper = 0.0;
};

inline IqrFences iqr_fences(const std::vector<double>& values) {
    if (values.empty()) throw DataError("iqr_filter: empty input");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quartile(sorted, 0.25);
    const double q3 = quartile(sorted, 0.75);
    const double iqr = q3 - q1;
    return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

// Keep values inside the Tukey fences [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
inline std::vector<double> iqr_filter(const std::vector<double>& values) {
    const IqrFences f = iqr_fences(values);
    std::vector<double> kept;
    kept.reserve(values.size());
    for (double v : values)
        if (v >= f.lower && v <= f.upper) kept.push_back(v);
    return kept;
}

// Fences computed per item over the whole cohort, then applied row-wise.
inline std::vector<EventRow> iqr_filter_events(const std::vector<EventRow>& events,
                                               long long& removed) {
    std::unordered_map<int, std::vector<double>> by_item;
    for (const auto& e : events) by_item[e.item_id].push_back(e.value);
    std::unordered_map<int, IqrFences> fences;
    for (const auto& [item, vals] : by_item) fences[item] = iqr_fences(vals);
    std::vector<EventRow> kept;
    kept.reserve(events.size());
    for (const auto& e : events) {
        const IqrFences& f = fences[e.item_id];
        if (e.value < f.lower || e.value > f.upper) {
            ++removed;
            continue;
        }
        kept.push_back(e);
    }
    return kept;
}

// Arithmetic mean per (admission, item); groups emptied by cleaning are
// simply absent (missing value).
inline EventMeans aggregate_mean(const std::vector<EventRow>& lab_events,
                                 const std::vector<EventRow>& chart_events) {
    struct Acc {
        double sum = 0.0;
        long long n = 0;
    };
    std::unordered_map<std::string, std::map<int, Acc>> acc;
    const auto add = [&](const std::vector<EventRow>& events) {
        for (const auto& e : events) {
            Acc& a = acc[e.admission_id][e.item_id];
            a.sum += e.value;
            a.n += 1;
        }
    };
    add(lab_events);
    add(chart_events);
    EventMeans means;
    for (const auto& [adm, items] : acc)
        for (const auto& [item, a] : items) means[adm][item] = a.sum / static_cast<double>(a.n);
    return means;
}

// Conservative bounds for the bundled item dictionary. Editable via the
// plausibility-ranges config file.
inline std::vector<PlausibilityRange> default_plausibility_ranges() {
    return {
        {5001, 50.0, 500.0},    // total cholesterol mg/dL
        {5002, 10.0, 400.0},    // LDL cholesterol mg/dL
        {5003, 0.1, 25.0},      // creatinine mg/dL
        {5004, 1.0, 250.0},     // blood urea nitrogen mg/dL
        {5005, 1.0, 3000.0},    // alanine transaminase IU/L
        {5006, 0.5, 10.0},      // albumin g/dL
        {5007, 0.005, 50.0},    // troponin T ng/mL
        {5008, 10.0, 20000.0},  // creatine kinase IU/L
        {5009, 100.0, 175.0},   // sodium mEq/L
        {5010, 1.0, 10.0},      // potassium mEq/L
        {5011, 10.0, 1500.0},   // glucose mg/dL
        {5012, 10.0, 70.0},     // hematocrit %
        {6001, 30.0, 300.0},    // systolic blood pressure mmHg
        {6002, 10.0, 200.0},    // diastolic blood pressure mmHg
        {6003, 10.0, 300.0},    // heart rate bpm
        {6004, 2.0, 80.0},      // respiratory rate /min
    };
}

constexpr int kSystolicItemId = 6001;
constexpr int kDiastolicItemId = 6002;

inline std::vector<PlausibilityRange> read_plausibility_ranges(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::vector<PlausibilityRange> ranges;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string ctx = path.filename().string() + ":" + std::to_string(t.line_numbers[r]);
        PlausibilityRange pr;
        pr.item_id = static_cast<int>(parse_int(t.rows[r][t.column("item_id")], ctx));
        pr.min = parse_double(t.rows[r][t.column("min")], ctx);
        pr.max = parse_double(t.rows[r][t.column("max")], ctx);
        ranges.push_back(pr);
    }
    return ranges;
}

inline void write_plausibility_ranges(const std::filesystem::path& path,
                                      const std::vector<PlausibilityRange>& ranges) {
    CsvWriter w(path);
    w.row({"item_id", "min", "max"});
    for (const auto& r : ranges) {
        char lo[32], hi[32];
        std::snprintf(lo, sizeof(lo), "%g", r.min);
        std::snprintf(hi, sizeof(hi), "%g", r.max);
        w.row({std::to_string(r.item_id), lo, hi});
    }
    w.close();
}

struct Cohort {
    std::vector<AdmissionCase> cases;
    CleanReport report;
};

// Fixed pipeline: clean -> optional per-item IQR filter on labs ->
// per-admission averaging -> cohort selection with means attached.
inline Cohort build_cohort(const RawTables& tables, CleanConfig config) {
    if (!config.systolic_item || !config.diastolic_item) {
        for (const auto& item : tables.lab_items) {
            const std::string l = detail::lower(item.label);
            if (!config.systolic_item && l.find("systolic") != std::string::npos)
                config.systolic_item = item.item_id;
            if (!config.diastolic_item && l.find("diastolic") != std::string::npos)
                config.diastolic_item = item.item_id;
        }
    }

    Cohort out;
    CleanedEvents cleaned = clean_events(tables.lab_events, tables.chart_events, config);
    out.report = cleaned.report;
    if (config.remove_outliers)
        cleaned.lab_events = iqr_filter_events(cleaned.lab_events, out.report.lab_outliers_removed);

    {
        std::vector<std::pair<std::string, std::string>> pairs;
        pairs.reserve(tables.diagnoses.size());
        for (const auto& d : tables.diagnoses) pairs.emplace_back(d.admission_id, d.icd9_code);
        out.report.duplicate_diagnosis_rows =
            static_cast<long long>(pairs.size() - dedup_codes(pairs).size());
        pairs.clear();
        for (const auto& d : tables.drg_codes) pairs.emplace_back(d.admission_id, d.drg_code);
        out.report.duplicate_drg_rows =
            static_cast<long long>(pairs.size() - dedup_codes(pairs).size());
    }

    EventMeans means = aggregate_mean(cleaned.lab_events, cleaned.chart_events);
    out.cases = select_cohort(tables, means);
    return out;
}

inline void write_clean_report(const std::filesystem::path& path, const CleanReport& report,
                               const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    w.row({"rule", "rows_removed"});
    for (const auto& [rule, n] : report.rows()) w.row({rule, std::to_string(n)});
    w.close();
}

}  // namespace amipred
