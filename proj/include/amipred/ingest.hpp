#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "amipred/core.hpp"
#include "amipred/csv.hpp"

namespace amipred {

struct DiagnosisRow {
    std::string admission_id;
    std::string icd9_code;
};

struct DrgRow {
    std::string admission_id;
    std::string drg_code;
    std::string description;
};

struct EventRow {
    std::string admission_id;
    int item_id = 0;
    double value = 0.0;
    std::string unit;
    Timestamp timestamp;
};

struct LabItemRow {
    int item_id = 0;
    std::string label;
};

// The seven relational tables used by the pipeline.
struct RawTables {
    std::vector<PatientRecord> patients;
    std::vector<AdmissionRecord> admissions;
    std::vector<DiagnosisRow> diagnoses;
    std::vector<DrgRow> drg_codes;
    std::vector<EventRow> lab_events;
    std::vector<EventRow> chart_events;
    std::vector<LabItemRow> lab_items;
};

struct TablePaths {
    std::filesystem::path patients, admissions, diagnoses, drg_codes, lab_events, chart_events,
        lab_items;

    static TablePaths in_dir(const std::filesystem::path& dir) {
        TablePaths p;
        p.patients = dir / "patients.csv";
        p.admissions = dir / "admissions.csv";
        p.diagnoses = dir / "diagnoses.csv";
        p.drg_codes = dir / "drg_codes.csv";
        p.lab_events = dir / "lab_events.csv";
        p.chart_events = dir / "chart_events.csv";
        p.lab_items = dir / "lab_items.csv";
        return p;
    }
};

// Table 1's treatment categories, matched against DRG descriptions.
inline const std::vector<std::string>& treatment_categories() {
    static const std::vector<std::string> kCategories = {
        "cardiac catheterization",
        "cardiac defibrillator and heart assist anomaly",
        "cardiac defibrillator implant with cardiac catheterization",
        "cardiac defibrillator implant without cardiac catheterization",
        "cardiac valve and other major cardiothoracic procedures with cardiac catheterization",
        "cardiac valve and other major cardiothoracic procedures without cardiac catheterization",
        "cardiac valve procedures with cardiac catheterization",
        "cardiac valve procedures without cardiac catheterization",
        "coronary bypass with cardiac catheterization",
        "coronary bypass with cardiac catheterization or percutaneous cardiac procedure",
        "coronary bypass with ptca",
        "coronary bypass without cardiac catheterization",
        "coronary bypass without cardiac catheterization or percutaneous cardiac procedure",
        "other cardiac pacemaker implantation",
        "other major cardiovascular procedures",
        "other permanent cardiac pacemaker implant or ptca with coronary artery stent implant",
        "percutaneous cardiac procedure with drug-eluting stent",
        "percutaneous cardiac procedure with non-drug-eluting stent",
        "percutaneous cardiac procedure without coronary artery stent",
        "percutaneous cardiovascular procedure",
        "permanent cardiac pacemaker implant",
    };
    return kCategories;
}

// Table 1's diagnostic comorbidity groups.
inline const std::vector<std::string>& comorbidity_groups() {
    static const std::vector<std::string> kGroups = {
        "cancer",
        "endocrinology",
        "gastroenterology",
        "genitourinary",
        "hematological disorder",
        "infection",
        "liver or kidney issues",
        "neurological disorder",
        "orthopaedic disorder",
        "other cardiovascular disease",
        "other comorbidities",
        "respiratory disorder",
        "toxicity issues",
    };
    return kGroups;
}

namespace detail {

inline std::string normalize_category(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(c));
        } else if (c == '-' || std::isspace(c) || std::ispunct(c)) {
            pending_space = true;
        }
    }
    return out;
}

inline bool contains_word(const std::string& lower_text, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = lower_text.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lower_text[pos - 1]));
        std::size_t end = pos + word.size();
        bool right_ok =
            end == lower_text.size() || !std::isalpha(static_cast<unsigned char>(lower_text[end]));
        if (left_ok && right_ok) return true;
        pos = end;
    }
    return false;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

// Initial ER diagnosis counts as AMI when the free text names a myocardial
// infarction or asks to rule one out.
inline bool er_initial_ami(const std::string& initial_diagnosis_text) {
    const std::string text = detail::lower(initial_diagnosis_text);
    if (text.find("myocardial infarction") != std::string::npos) return true;
    return text.find("rule out") != std::string::npos && detail::contains_word(text, "mi");
}

// Cohort inclusion: ICD-9 codes whose numeric value lies in [410.0, 411.0].
// Bare "410"/"411" prefixes parse to the range endpoints and count as
// in-range; non-numeric codes never qualify.
inline bool icd9_in_ami_range(const std::string& code) {
    if (code.empty()) return false;
    char* end = nullptr;
    double v = std::strtod(code.c_str(), &end);
    if (end == code.c_str() || *end != '\0') return false;
    return v >= 410.0 && v <= 411.0;
}

// Collapse exact (admission, code) duplicates, keeping first occurrences in
// order; distinct codes for the same admission are all retained.
inline std::vector<std::pair<std::string, std::string>> dedup_codes(
    const std::vector<std::pair<std::string, std::string>>& rows) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::pair<std::string, std::string>> seen;
    out.reserve(rows.size());
    for (const auto& row : rows)
        if (seen.insert(row).second) out.push_back(row);
    return out;
}

namespace detail {

inline PatientRecord parse_patient(const CsvTable& t, std::size_t r, const std::string& file) {
    const auto ctx = [&](const char* col) {
        return file + ":" + std::to_string(t.line_numbers[r]) + " " + col;
    };
    PatientRecord p;
    p.patient_id = t.rows[r][t.column("patient_id")];
    p.gender = t.rows[r][t.column("gender")];
    p.date_of_birth = Timestamp::parse(t.rows[r][t.column("date_of_birth")]);
    const std::string& dod = t.rows[r][t.column("date_of_death")];
    if (!dod.empty()) {
        p.date_of_death = Timestamp::parse(dod);
        if (*p.date_of_death < p.date_of_birth)
            throw DataError(ctx("date_of_death") + ": precedes date_of_birth");
    }
    if (p.patient_id.empty()) throw DataError(ctx("patient_id") + ": empty");
    if (p.gender != "M" && p.gender != "F")
        throw DataError(ctx("gender") + ": expected M or F, got '" + p.gender + "'");
    return p;
}

inline AdmissionRecord parse_admission(const CsvTable& t, std::size_t r, const std::string& file) {
    AdmissionRecord a;
    a.admission_id = t.rows[r][t.column("admission_id")];
    a.patient_id = t.rows[r][t.column("patient_id")];
    a.admit_time = Timestamp::parse(t.rows[r][t.column("admit_time")]);
    a.discharge_time = Timestamp::parse(t.rows[r][t.column("discharge_time")]);
    a.discharge_location = t.rows[r][t.column("discharge_location")];
    a.religion = t.rows[r][t.column("religion")];
    a.ethnicity = t.rows[r][t.column("ethnicity")];
    a.marital_status = t.rows[r][t.column("marital_status")];
    a.initial_diagnosis_text = t.rows[r][t.column("initial_diagnosis_text")];
    if (a.discharge_time < a.admit_time)
        throw DataError(file + ":" + std::to_string(t.line_numbers[r]) +
                        ": discharge_time precedes admit_time for admission " + a.admission_id);
    a.total_days = days_between(a.admit_time, a.discharge_time);
    a.admission_month = a.admit_time.month();
    a.er_initial_ami_flag = er_initial_ami(a.initial_diagnosis_text);
    return a;
}

inline EventRow parse_event(const CsvTable& t, std::size_t r, const std::string& file) {
    const std::string ctx = file + ":" + std::to_string(t.line_numbers[r]);
    EventRow e;
    e.admission_id = t.rows[r][t.column("admission_id")];
    e.item_id = static_cast<int>(parse_int(t.rows[r][t.column("item_id")], ctx));
    e.value = parse_double(t.rows[r][t.column("value")], ctx);
    if (!std::isfinite(e.value)) throw DataError(ctx + ": non-finite event value");
    e.unit = t.rows[r][t.column("unit")];
    e.timestamp = Timestamp::parse(t.rows[r][t.column("timestamp")]);
    return e;
}

}  // namespace detail

// Parse the seven delimited tables and validate referential integrity:
// every admission references a known patient, and every diagnosis, DRG, and
// event row references a known admission.
inline RawTables load_tables(const TablePaths& paths) {
    RawTables tables;

    CsvTable patients = read_csv(paths.patients);
    for (std::size_t r = 0; r < patients.rows.size(); ++r)
        tables.patients.push_back(detail::parse_patient(patients, r, paths.patients.filename().string()));

    std::unordered_set<std::string> patient_ids;
    for (const auto& p : tables.patients) patient_ids.insert(p.patient_id);

    CsvTable admissions = read_csv(paths.admissions);
    const std::string adm_file = paths.admissions.filename().string();
    for (std::size_t r = 0; r < admissions.rows.size(); ++r) {
        AdmissionRecord a = detail::parse_admission(admissions, r, adm_file);
        if (!patient_ids.count(a.patient_id))
            throw DataError(adm_file + ":" + std::to_string(admissions.line_numbers[r]) +
                            ": admission " + a.admission_id + " references unknown patient '" +
                            a.patient_id + "'");
        tables.admissions.push_back(std::move(a));
    }

    std::unordered_set<std::string> admission_ids;
    for (const auto& a : tables.admissions) admission_ids.insert(a.admission_id);
    const auto check_admission = [&](const std::string& id, const std::string& file,
                                     std::size_t line) {
        if (!admission_ids.count(id))
            throw DataError(file + ":" + std::to_string(line) +
                            ": row references unknown admission '" + id + "'");
    };

    CsvTable diagnoses = read_csv(paths.diagnoses);
    const std::string diag_file = paths.diagnoses.filename().string();
    for (std::size_t r = 0; r < diagnoses.rows.size(); ++r) {
        DiagnosisRow d;
        d.admission_id = diagnoses.rows[r][diagnoses.column("admission_id")];
        d.icd9_code = diagnoses.rows[r][diagnoses.column("icd9_code")];
        if (d.icd9_code.empty())
            throw DataError(diag_file + ":" + std::to_string(diagnoses.line_numbers[r]) +
                            ": empty icd9_code");
        check_admission(d.admission_id, diag_file, diagnoses.line_numbers[r]);
        tables.diagnoses.push_back(std::move(d));
    }

    CsvTable drg = read_csv(paths.drg_codes);
    const std::string drg_file = paths.drg_codes.filename().string();
    for (std::size_t r = 0; r < drg.rows.size(); ++r) {
        DrgRow d;
        d.admission_id = drg.rows[r][drg.column("admission_id")];
        d.drg_code = drg.rows[r][drg.column("drg_code")];
        d.description = drg.rows[r][drg.column("description")];
        check_admission(d.admission_id, drg_file, drg.line_numbers[r]);
        tables.drg_codes.push_back(std::move(d));
    }

    CsvTable labs = read_csv(paths.lab_events);
    const std::string lab_file = paths.lab_events.filename().string();
    for (std::size_t r = 0; r < labs.rows.size(); ++r) {
        EventRow e = detail::parse_event(labs, r, lab_file);
        check_admission(e.admission_id, lab_file, labs.line_numbers[r]);
        tables.lab_events.push_back(std::move(e));
    }

    CsvTable charts = read_csv(paths.chart_events);
    const std::string chart_file = paths.chart_events.filename().string();
    for (std::size_t r = 0; r < charts.rows.size(); ++r) {
        EventRow e = detail::parse_event(charts, r, chart_file);
        check_admission(e.admission_id, chart_file, charts.line_numbers[r]);
        tables.chart_events.push_back(std::move(e));
    }

    CsvTable items = read_csv(paths.lab_items);
    const std::string item_file = paths.lab_items.filename().string();
    for (std::size_t r = 0; r < items.rows.size(); ++r) {
        LabItemRow i;
        i.item_id = static_cast<int>(
            parse_int(items.rows[r][items.column("item_id")],
                      item_file + ":" + std::to_string(items.line_numbers[r])));
        i.label = items.rows[r][items.column("label")];
        tables.lab_items.push_back(std::move(i));
    }

    return tables;
}

// Admission-level event means, attached to cases by select_cohort.
using EventMeans = std::unordered_map<std::string, std::map<int, double>>;

// One AdmissionCase per admission carrying at least one ICD-9 code in the
// AMI/PMS range, in admissions-table order. Duplicate diagnosis and DRG
// rows are collapsed first; distinct codes all count.
inline std::vector<AdmissionCase> select_cohort(const RawTables& tables,
                                                const EventMeans& event_means = {},
                                                double masking_threshold = kDefaultMaskingThresholdYears) {
    std::unordered_map<std::string, const PatientRecord*> patients;
    for (const auto& p : tables.patients) patients[p.patient_id] = &p;

    std::vector<std::pair<std::string, std::string>> diag_pairs;
    diag_pairs.reserve(tables.diagnoses.size());
    for (const auto& d : tables.diagnoses) diag_pairs.emplace_back(d.admission_id, d.icd9_code);
    diag_pairs = dedup_codes(diag_pairs);
    std::unordered_map<std::string, std::set<std::string>> codes_by_admission;
    for (const auto& [adm, code] : diag_pairs) codes_by_admission[adm].insert(code);

    std::vector<std::pair<std::string, std::string>> drg_pairs;
    drg_pairs.reserve(tables.drg_codes.size());
    for (const auto& d : tables.drg_codes) drg_pairs.emplace_back(d.admission_id, d.drg_code);
    drg_pairs = dedup_codes(drg_pairs);
    std::set<std::pair<std::string, std::string>> kept_drg(drg_pairs.begin(), drg_pairs.end());

    std::unordered_map<std::string, std::string> category_by_norm;
    for (const auto& t : treatment_categories())
        category_by_norm["T:" + detail::normalize_category(t)] = t;
    for (const auto& g : comorbidity_groups())
        category_by_norm["C:" + detail::normalize_category(g)] = g;

    std::unordered_map<std::string, std::set<std::string>> treatments_by_admission;
    std::unordered_map<std::string, std::set<std::string>> comorbidities_by_admission;
    std::set<std::pair<std::string, std::string>> seen_drg;
    for (const auto& d : tables.drg_codes) {
        if (!kept_drg.count({d.admission_id, d.drg_code})) continue;
        if (!seen_drg.insert({d.admission_id, d.drg_code}).second) continue;
        const std::string norm = detail::normalize_category(d.description);
        if (auto it = category_by_norm.find("T:" + norm); it != category_by_norm.end())
            treatments_by_admission[d.admission_id].insert(it->second);
        else if (auto ct = category_by_norm.find("C:" + norm); ct != category_by_norm.end())
            comorbidities_by_admission[d.admission_id].insert(ct->second);
        // unrecognized descriptions carry no feature
    }

    std::vector<AdmissionCase> cases;
    for (const auto& adm : tables.admissions) {
        auto codes_it = codes_by_admission.find(adm.admission_id);
        if (codes_it == codes_by_admission.end()) continue;
        bool qualifies = false;
        for (const auto& code : codes_it->second)
            if (icd9_in_ami_range(code)) {
                qualifies = true;
                break;
            }
        if (!qualifies) continue;

        AdmissionCase c;
        c.admission = adm;
        c.patient = *patients.at(adm.patient_id);
        c.age_at_admission =
            restore_masked_age(age_at(adm.admit_time, c.patient.date_of_birth), masking_threshold);
        c.diagnoses = codes_it->second;
        if (auto t = treatments_by_admission.find(adm.admission_id); t != treatments_by_admission.end())
            c.treatments = t->second;
        if (auto g = comorbidities_by_admission.find(adm.admission_id); g != comorbidities_by_admission.end())
            c.comorbidity_groups = g->second;
        if (auto m = event_means.find(adm.admission_id); m != event_means.end())
            c.event_means = m->second;
        c.label = assign_label(adm.admit_time, c.patient.date_of_death);
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace amipred
