#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "amipred/dates.hpp"
#include "amipred/errors.hpp"

namespace amipred {

// Death within one year of admission is the positive class everywhere.
enum class Label : int { negative = 0, positive = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }

struct PatientRecord {
    std::string patient_id;
    std::string gender;  // "M" or "F"
    Timestamp date_of_birth;
    std::optional<Timestamp> date_of_death;
};

struct AdmissionRecord {
    std::string admission_id;
    std::string patient_id;
    Timestamp admit_time;
    Timestamp discharge_time;
    unsigned admission_month = 0;   // 1-12, from admit_time
    double total_days = 0.0;        // discharge - admit, fractional days
    std::string discharge_location;
    bool er_initial_ami_flag = false;
    std::string religion;
    std::string ethnicity;
    std::string marital_status;
    std::string initial_diagnosis_text;
};

// One hospital admission joined with its patient, diagnoses, DRG-derived
// categories, and averaged event values; the unit of prediction.
struct AdmissionCase {
    AdmissionRecord admission;
    PatientRecord patient;
    double age_at_admission = 0.0;  // years, de-masked
    std::set<std::string> diagnoses;
    std::set<std::string> treatments;
    std::set<std::string> comorbidity_groups;
    std::map<int, double> event_means;  // item id -> averaged value
    Label label = Label::negative;
};

constexpr int kOneYearDays = 365;
constexpr double kDefaultMaskingThresholdYears = 200.0;
constexpr double kAgeMaskOffsetYears = 211.0;

// Positive iff the patient died within 365 days of admission, measured at
// day precision.
inline Label assign_label(Timestamp admit_time, std::optional<Timestamp> date_of_death) {
    if (!date_of_death.has_value()) return Label::negative;
    if (*date_of_death < admit_time)
        throw DataError("date of death " + date_of_death->to_string() +
                        " precedes admission at " + admit_time.to_string());
    std::int64_t days = date_of_death->day() - admit_time.day();
    return days <= kOneYearDays ? Label::positive : Label::negative;
}

// Recorded ages above the masking threshold were shifted up by 211 years;
// shift them back. Real ages never exceed the threshold.
inline double restore_masked_age(double recorded_age,
                                 double masking_threshold = kDefaultMaskingThresholdYears) {
    if (recorded_age < 0.0)
        throw DataError("negative recorded age: " + std::to_string(recorded_age));
    if (recorded_age > masking_threshold) {
        if (recorded_age < kAgeMaskOffsetYears)
            throw DataError("recorded age " + std::to_string(recorded_age) +
                            " implies a negative de-masked age");
        return recorded_age - kAgeMaskOffsetYears;
    }
    return recorded_age;
}

inline double age_at(Timestamp admit_time, Timestamp date_of_birth) {
    return days_between(date_of_birth, admit_time) / 365.25;
}

}  // namespace amipred
