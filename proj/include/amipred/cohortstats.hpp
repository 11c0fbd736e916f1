#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "amipred/core.hpp"
#include "amipred/errors.hpp"

namespace amipred {

// Upper-tail probability of the chi-square distribution with one degree of
// freedom: sf(x) = erfc(sqrt(x/2)).
inline double chisq_sf(double x) {
    if (x < 0.0)
        throw ContractError("chisq_sf: negative statistic");
    return std::erfc(std::sqrt(x / 2.0));
}

struct ChiSquareResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
    bool defined = true;  // false when a marginal total is zero
};

// Pearson statistic for the 2x2 table [[a, b], [c, d]], no continuity
// correction: n (ad - bc)^2 / ((a+b)(c+d)(a+c)(b+d)).
inline ChiSquareResult chi_square_2x2(double a, double b, double c, double d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw ContractError("chi_square_2x2: negative count");
    const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0)
        throw DataError("chi_square_2x2: zero marginal total, test undefined");
    const double n = r1 + r2;
    const double diff = a * d - b * c;
    ChiSquareResult res;
    res.statistic = n * diff * diff / (r1 * r2 * c1 * c2);
    res.p_value = chisq_sf(res.statistic);
    return res;
}

struct SummaryRow {
    std::string characteristic;  // e.g. "Age when admitted"
    std::string subgroup;        // e.g. "70 to 79.9"
    long long n = 0;
    long long positives = 0;
    long long negatives = 0;
    double positive_pct = 0.0;
    double negative_pct = 0.0;
    ChiSquareResult chi_square;
};

namespace detail {

inline const char* age_band(double age) {
    if (age < 30.0) return "Under 30";
    if (age < 50.0) return "30 to 49.9";
    if (age < 60.0) return "50 to 59.9";
    if (age < 70.0) return "60 to 69.9";
    if (age < 80.0) return "70 to 79.9";
    if (age <= 90.0) return "80 to 90";
    return "Over 90";
}

inline std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

template <typename Pred>
SummaryRow subgroup_row(const std::vector<AdmissionCase>& cases, const std::string& characteristic,
                        const std::string& name, Pred in_subgroup) {
    long long sub_pos = 0, sub_neg = 0, rest_pos = 0, rest_neg = 0;
    for (const auto& c : cases) {
        const bool pos = c.label == Label::positive;
        if (in_subgroup(c))
            (pos ? sub_pos : sub_neg)++;
        else
            (pos ? rest_pos : rest_neg)++;
    }
    SummaryRow row;
    row.characteristic = characteristic;
    row.subgroup = name;
    row.positives = sub_pos;
    row.negatives = sub_neg;
    row.n = sub_pos + sub_neg;
    row.positive_pct = row.n ? 100.0 * sub_pos / row.n : 0.0;
    row.negative_pct = row.n ? 100.0 * sub_neg / row.n : 0.0;
    try {
        row.chi_square = chi_square_2x2(static_cast<double>(sub_pos), static_cast<double>(sub_neg),
                                        static_cast<double>(rest_pos), static_cast<double>(rest_neg));
    } catch (const DataError&) {
        row.chi_square.defined = false;
        row.chi_square.statistic = 0.0;
        row.chi_square.p_value = 1.0;
    }
    return row;
}

}  // namespace detail

// Cohort summary in the shape of the paper's Table 2: gender, age bands,
// ethnicity groups, initial-ER-diagnosis flag, and comorbidity presence,
// each tested subgroup-vs-complement on the one-year outcome.
inline std::vector<SummaryRow> summary_table(const std::vector<AdmissionCase>& cases) {
    if (cases.empty())
        throw DataError("summary_table: empty cohort");
    std::vector<SummaryRow> rows;

    long long total_pos = 0;
    for (const auto& c : cases) total_pos += c.label == Label::positive;
    SummaryRow overall;
    overall.characteristic = "Overall";
    overall.subgroup = "Total";
    overall.n = static_cast<long long>(cases.size());
    overall.positives = total_pos;
    overall.negatives = overall.n - total_pos;
    overall.positive_pct = 100.0 * overall.positives / overall.n;
    overall.negative_pct = 100.0 * overall.negatives / overall.n;
    overall.chi_square.defined = false;
    rows.push_back(overall);

    rows.push_back(detail::subgroup_row(cases, "Gender", "Male",
                                        [](const AdmissionCase& c) { return c.patient.gender == "M"; }));
    rows.push_back(detail::subgroup_row(cases, "Gender", "Female",
                                        [](const AdmissionCase& c) { return c.patient.gender == "F"; }));

    static const char* kBands[] = {"Under 30",   "30 to 49.9", "50 to 59.9", "60 to 69.9",
                                   "70 to 79.9", "80 to 90",   "Over 90"};
    for (const char* band : kBands)
        rows.push_back(detail::subgroup_row(cases, "Age when admitted", band,
                                            [band](const AdmissionCase& c) {
                                                return std::string(detail::age_band(c.age_at_admission)) == band;
                                            }));

    static const char* kEthnicities[] = {"Asian", "Black", "Hispanic/Latino", "Other", "White"};
    for (const char* eth : kEthnicities)
        rows.push_back(detail::subgroup_row(cases, "Ethnicity", eth,
                                            [eth](const AdmissionCase& c) {
                                                return detail::upper(c.admission.ethnicity) ==
                                                       detail::upper(eth);
                                            }));

    rows.push_back(detail::subgroup_row(cases, "Initial ER Diagnosis MI?", "Yes",
                                        [](const AdmissionCase& c) { return c.admission.er_initial_ami_flag; }));
    rows.push_back(detail::subgroup_row(cases, "Initial ER Diagnosis MI?", "No",
                                        [](const AdmissionCase& c) { return !c.admission.er_initial_ami_flag; }));

    rows.push_back(detail::subgroup_row(cases, "With Comorbidities", "Total",
                                        [](const AdmissionCase& c) { return !c.comorbidity_groups.empty(); }));
    return rows;
}

}  // namespace amipred
