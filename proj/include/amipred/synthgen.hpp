#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "amipred/core.hpp"
#include "amipred/csv.hpp"
#include "amipred/ingest.hpp"
#include "amipred/learners/base.hpp"
#include "amipred/preprocess.hpp"

namespace amipred {

// Schema-compatible synthetic cohort: labels come from a planted logistic
// model over a per-admission latent risk, and the generated files exercise
// every preprocessing rule (zero labs, implausible values, reversed
// blood-pressure pairs, duplicate codes, masked ages).
struct SynthConfig {
    std::size_t n_admissions = 5436;
    double positive_rate = 1629.0 / 5436.0;
    double signal_admission = 0.0;
    double signal_demographics = 0.0;
    double signal_treatment = 0.0;
    double signal_diagnostic = 0.0;
    double signal_lab_chart = 0.0;
    double masked_age_fraction = 0.02;
    double missingness_rate = 0.10;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_admissions < 10) throw ConfigError("synth: n_admissions must be at least 10");
        if (!(positive_rate > 0.0 && positive_rate < 1.0))
            throw ConfigError("synth: positive_rate must lie strictly between 0 and 1");
        for (double rate : {masked_age_fraction, missingness_rate})
            if (rate < 0.0 || rate > 1.0) throw ConfigError("synth: rates must lie in [0, 1]");
    }

    std::string canonical() const {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "n_admissions=%zu\npositive_rate=%.17g\nsignal_admission=%.17g\n"
                      "signal_demographics=%.17g\nsignal_treatment=%.17g\nsignal_diagnostic=%.17g\n"
                      "signal_lab_chart=%.17g\nmasked_age_fraction=%.17g\nmissingness_rate=%.17g\n"
                      "seed=%llu\n",
                      n_admissions, positive_rate, signal_admission, signal_demographics,
                      signal_treatment, signal_diagnostic, signal_lab_chart, masked_age_fraction,
                      missingness_rate, static_cast<unsigned long long>(seed));
        return buf;
    }
};

inline SynthConfig read_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synth config: " + path.string());
    SynthConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.filename().string() + ":" + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const std::string ctx = path.filename().string() + ":" + std::to_string(line_no);
        if (key == "n_admissions")
            c.n_admissions = static_cast<std::size_t>(parse_int(value, ctx));
        else if (key == "positive_rate")
            c.positive_rate = parse_double(value, ctx);
        else if (key == "signal_admission")
            c.signal_admission = parse_double(value, ctx);
        else if (key == "signal_demographics")
            c.signal_demographics = parse_double(value, ctx);
        else if (key == "signal_treatment")
            c.signal_treatment = parse_double(value, ctx);
        else if (key == "signal_diagnostic")
            c.signal_diagnostic = parse_double(value, ctx);
        else if (key == "signal_lab_chart")
            c.signal_lab_chart = parse_double(value, ctx);
        else if (key == "masked_age_fraction")
            c.masked_age_fraction = parse_double(value, ctx);
        else if (key == "missingness_rate")
            c.missingness_rate = parse_double(value, ctx);
        else if (key == "seed")
            c.seed = static_cast<std::uint64_t>(parse_int(value, ctx));
        else
            throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
    return c;
}

inline void write_synth_config(const SynthConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write synth config: " + path.string());
    out << c.canonical();
}

struct SynthItem {
    int item_id;
    const char* label;
    const char* unit;
    double mean, sd;
    double weight;  // direction and strength of the lab/chart signal
    bool chart;
};

inline const std::vector<SynthItem>& synth_item_menu() {
    static const std::vector<SynthItem> kItems = {
        {5001, "Total cholesterol", "mg/dL", 180.0, 35.0, 0.5, false},
        {5002, "LDL cholesterol", "mg/dL", 110.0, 30.0, 0.6, false},
        {5003, "Creatinine", "mg/dL", 1.3, 0.5, 1.0, false},
        {5004, "Blood urea nitrogen", "mg/dL", 22.0, 8.0, 0.9, false},
        {5005, "Alanine transaminase", "IU/L", 38.0, 18.0, 0.6, false},
        {5006, "Albumin", "g/dL", 3.8, 0.5, -1.0, false},
        {5007, "Troponin T", "ng/mL", 0.35, 0.22, 1.0, false},
        {5008, "Creatine kinase", "IU/L", 260.0, 140.0, 0.7, false},
        {5009, "Sodium", "mEq/L", 139.0, 3.5, -0.4, false},
        {5010, "Potassium", "mEq/L", 4.2, 0.5, 0.3, false},
        {5011, "Glucose", "mg/dL", 135.0, 38.0, 0.6, false},
        {5012, "Hematocrit", "%", 38.0, 5.0, -0.6, false},
        {6001, "Systolic blood pressure", "mmHg", 126.0, 16.0, -0.5, true},
        {6002, "Diastolic blood pressure", "mmHg", 72.0, 10.0, -0.4, true},
        {6003, "Heart rate", "bpm", 86.0, 14.0, 0.6, true},
        {6004, "Respiratory rate", "/min", 18.0, 4.0, 0.7, true},
    };
    return kItems;
}

struct SynthResult {
    RawTables tables;
    std::vector<int> planted_labels;        // one per AMI admission, admissions order
    std::vector<std::string> ami_admission_ids;
};

namespace detail {

struct SynthAdmission {
    std::size_t patient_idx = 0;
    double z = 0.0;  // latent risk
    bool last_of_patient = true;
    std::int64_t admit_secs = 0;
    double stay_days = 1.0;
    int label = 0;
};

inline double clipd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace detail

inline SynthResult generate_tables(const SynthConfig& config) {
    config.validate();
    const std::size_t n = config.n_admissions;

    // fixed secondary rates; each preprocessing rule fires on default sizes
    const double kReadmitRate = 0.12;
    const double kExtraAdmissionRate = 0.07;
    const double kZeroLabRate = 0.006;
    const double kImplausibleRate = 0.003;
    const double kReversedBpRate = 0.015;
    const double kDuplicateDiagRate = 0.05;
    const double kDuplicateDrgRate = 0.03;
    const double kLateDeathRate = 0.25;

    std::mt19937_64 rng(mix_seed(config.seed, 17));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::map<int, PlausibilityRange> bounds;
    for (const auto& r : default_plausibility_ranges()) bounds[r.item_id] = r;

    SynthResult out;
    RawTables& tables = out.tables;
    for (const auto& item : synth_item_menu()) tables.lab_items.push_back({item.item_id, item.label});

    // --- patients and AMI admissions with latent risk ---
    struct Patient {
        std::string id;
        std::string gender;
        double first_age = 70.0;
        bool masked = false;
        std::int64_t dob_day = 0;
        std::vector<std::size_t> admission_order;  // indices into adms
    };
    std::vector<Patient> patients;
    std::vector<detail::SynthAdmission> adms(n);

    const std::int64_t epoch_day = days_from_civil(2100, 1, 3);
    for (std::size_t i = 0; i < n; ++i) {
        detail::SynthAdmission& adm = adms[i];
        adm.z = normal(rng);
        const bool readmit = !patients.empty() && unit(rng) < kReadmitRate;
        if (readmit) {
            std::uniform_int_distribution<std::size_t> pick(0, patients.size() - 1);
            std::size_t tries = 0;
            std::size_t pi = pick(rng);
            // readmitting the same patient too often stretches the timeline
            while (patients[pi].admission_order.size() >= 3 && tries++ < 4) pi = pick(rng);
            adm.patient_idx = pi;
        } else {
            Patient p;
            p.id = "P" + std::to_string(patients.size() + 1);
            const double gender_logit =
                std::log(0.4 / 0.6) + 0.5 * config.signal_demographics * adm.z;
            p.gender = unit(rng) < sigmoid(gender_logit) ? "F" : "M";
            p.masked = unit(rng) < config.masked_age_fraction;
            p.first_age = p.masked
                              ? 89.5 + std::abs(normal(rng)) * 3.0
                              : detail::clipd(70.0 + 12.0 * normal(rng) +
                                                  6.0 * config.signal_demographics * adm.z,
                                              22.0, 97.0);
            patients.push_back(std::move(p));
            adm.patient_idx = patients.size() - 1;
        }
        Patient& p = patients[adm.patient_idx];

        if (p.admission_order.empty()) {
            adm.admit_secs = (epoch_day + static_cast<std::int64_t>(unit(rng) * 4000.0)) * 86400 +
                             static_cast<std::int64_t>(unit(rng) * 86399.0);
        } else {
            // gaps beyond one year keep per-admission labels independent
            const auto& prev = adms[p.admission_order.back()];
            adm.admit_secs = prev.admit_secs +
                             (366 + static_cast<std::int64_t>(unit(rng) * 700.0)) * 86400 +
                             static_cast<std::int64_t>(unit(rng) * 3600.0);
            adms[p.admission_order.back()].last_of_patient = false;
        }
        adm.stay_days = detail::clipd(
            std::exp(1.4 + 0.45 * normal(rng) + 0.35 * config.signal_admission * adm.z), 0.2, 60.0);
        p.admission_order.push_back(i);
    }

    // --- planted labels: Bernoulli(sigmoid), repaired so only a patient's
    // last admission can be positive, then adjusted to the exact count ---
    const double base_logit = std::log(config.positive_rate / (1.0 - config.positive_rate));
    std::vector<double> prob(n);
    {
        std::mt19937_64 label_rng(mix_seed(config.seed, 23));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            prob[i] = sigmoid(2.2 * adms[i].z + base_logit);
            adms[i].label = adms[i].last_of_patient && u(label_rng) < prob[i] ? 1 : 0;
        }
    }
    const long long target = std::llround(config.positive_rate * static_cast<double>(n));
    long long count = 0;
    for (const auto& a : adms) count += a.label;
    if (count != target) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < n; ++i)
            if (adms[i].last_of_patient && adms[i].label == (count < target ? 0 : 1))
                candidates.push_back(i);
        if (count < target)
            std::stable_sort(candidates.begin(), candidates.end(),
                             [&](std::size_t a, std::size_t b) { return prob[a] > prob[b]; });
        else
            std::stable_sort(candidates.begin(), candidates.end(),
                             [&](std::size_t a, std::size_t b) { return prob[a] < prob[b]; });
        for (std::size_t k = 0; k < candidates.size() && count != target; ++k) {
            adms[candidates[k]].label ^= 1;
            count += adms[candidates[k]].label ? 1 : -1;
        }
        if (count != target)
            throw DataError("synth: cannot reach the requested positive count");
    }

    // --- death dates per patient ---
    std::vector<std::optional<std::int64_t>> death_day(patients.size());
    {
        std::mt19937_64 death_rng(mix_seed(config.seed, 29));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t pi = 0; pi < patients.size(); ++pi) {
            const std::size_t last = patients[pi].admission_order.back();
            const std::int64_t last_admit_day = adms[last].admit_secs / 86400;
            if (adms[last].label) {
                death_day[pi] = last_admit_day + 1 + static_cast<std::int64_t>(u(death_rng) * 364.0);
            } else if (u(death_rng) < kLateDeathRate) {
                death_day[pi] =
                    last_admit_day + 366 + 1 + static_cast<std::int64_t>(u(death_rng) * 1400.0);
            }
        }
    }

    // --- patient table ---
    for (std::size_t pi = 0; pi < patients.size(); ++pi) {
        const Patient& p = patients[pi];
        const auto& first = adms[p.admission_order.front()];
        const double recorded_age = p.masked ? p.first_age + kAgeMaskOffsetYears : p.first_age;
        PatientRecord rec;
        rec.patient_id = p.id;
        rec.gender = p.gender;
        rec.date_of_birth = Timestamp(
            first.admit_secs - static_cast<std::int64_t>(recorded_age * 365.25 * 86400.0));
        if (death_day[pi])
            rec.date_of_death = Timestamp(*death_day[pi] * 86400 + 43200);
        tables.patients.push_back(std::move(rec));
    }

    // --- admissions, diagnoses, DRG rows, events ---
    static const char* kAmiCodes[] = {"410.01", "410.11", "410.41", "410.71", "410.9", "411.0"};
    static const char* kOtherCodes[] = {"428.0", "401.9", "250.00"};
    static const char* kAmiTexts[] = {"Acute myocardial infarction", "MYOCARDIAL INFARCTION",
                                      "Rule out MI", "rule out myocardial infarction"};
    static const char* kOtherTexts[] = {"Chest pain", "Shortness of breath", "Syncope",
                                        "Abdominal pain", "CHF exacerbation"};
    static const char* kReligions[] = {"CATHOLIC", "PROTESTANT", "JEWISH", "NONE", "OTHER"};
    static const char* kEthnicities[] = {"WHITE", "BLACK", "ASIAN", "HISPANIC/LATINO", "OTHER"};
    static const double kEthnicityCum[] = {0.66, 0.76, 0.82, 0.88, 1.0};
    static const char* kMarital[] = {"MARRIED", "SINGLE", "WIDOWED", "DIVORCED"};

    std::mt19937_64 event_rng(mix_seed(config.seed, 31));
    std::normal_distribution<double> enormal(0.0, 1.0);
    std::uniform_real_distribution<double> eunit(0.0, 1.0);

    const auto emit_admission = [&](const std::string& adm_id, const Patient& p,
                                    const detail::SynthAdmission& a, bool ami) {
        AdmissionRecord rec;
        rec.admission_id = adm_id;
        rec.patient_id = p.id;
        rec.admit_time = Timestamp(a.admit_secs);
        rec.discharge_time =
            Timestamp(a.admit_secs + static_cast<std::int64_t>(a.stay_days * 86400.0));
        rec.religion = kReligions[static_cast<std::size_t>(eunit(event_rng) * 5.0) % 5];
        const double eth_draw = eunit(event_rng);
        for (std::size_t e = 0; e < 5; ++e)
            if (eth_draw <= kEthnicityCum[e]) {
                rec.ethnicity = kEthnicities[e];
                break;
            }
        rec.marital_status = kMarital[static_cast<std::size_t>(eunit(event_rng) * 4.0) % 4];
        if (eunit(event_rng) < sigmoid(-2.2 + 0.9 * config.signal_admission * a.z))
            rec.discharge_location = "HOSPICE";
        else {
            const double d = eunit(event_rng);
            rec.discharge_location = d < 0.62 ? "HOME" : d < 0.85 ? "SNF" : "REHAB";
        }
        if (ami && eunit(event_rng) <
                       sigmoid(-0.4 - 0.7 * config.signal_admission * a.z))
            rec.initial_diagnosis_text = kAmiTexts[static_cast<std::size_t>(eunit(event_rng) * 4.0) % 4];
        else
            rec.initial_diagnosis_text =
                kOtherTexts[static_cast<std::size_t>(eunit(event_rng) * 5.0) % 5];
        tables.admissions.push_back(std::move(rec));
    };

    const auto emit_events = [&](const std::string& adm_id, const detail::SynthAdmission& a) {
        const std::int64_t stay_secs = static_cast<std::int64_t>(a.stay_days * 86400.0);
        double sys_mean = 0.0;
        for (const auto& item : synth_item_menu()) {
            if (eunit(event_rng) < config.missingness_rate) continue;
            const PlausibilityRange& b = bounds.at(item.item_id);
            const double shifted_mean =
                item.mean + item.sd * 0.9 * config.signal_lab_chart * item.weight * a.z;
            const std::size_t draws = 1 + static_cast<std::size_t>(eunit(event_rng) * 3.0) % 3;
            for (std::size_t d = 0; d < draws; ++d) {
                EventRow e;
                e.admission_id = adm_id;
                e.item_id = item.item_id;
                e.unit = item.unit;
                e.timestamp = Timestamp(a.admit_secs + 60 +
                                        static_cast<std::int64_t>(eunit(event_rng) *
                                                                  static_cast<double>(stay_secs - 61)));
                double v = shifted_mean + item.sd * 0.5 * enormal(event_rng);
                v = detail::clipd(v, b.min * 1.02, b.max * 0.98);
                if (item.item_id == kSystolicItemId) sys_mean = v;
                if (item.item_id == kDiastolicItemId && sys_mean > 0.0 && v >= sys_mean)
                    v = sys_mean * 0.6;  // keep pairs physiological before reversal injection
                if (!item.chart && eunit(event_rng) < kZeroLabRate) v = 0.0;
                if (eunit(event_rng) < kImplausibleRate) v = b.max * (2.0 + eunit(event_rng));
                e.value = v;
                (item.chart ? tables.chart_events : tables.lab_events).push_back(std::move(e));
            }
        }
        // paired blood-pressure reading at one timestamp, possibly reversed
        const Timestamp bp_time(a.admit_secs + 30);
        double sys = detail::clipd(126.0 + 16.0 * 0.9 * config.signal_lab_chart * -0.5 * a.z +
                                       8.0 * enormal(event_rng),
                                   80.0, 240.0);
        double dia = detail::clipd(sys * 0.58 + 4.0 * enormal(event_rng), 40.0, sys - 10.0);
        if (eunit(event_rng) < kReversedBpRate) std::swap(sys, dia);
        tables.chart_events.push_back({adm_id, kSystolicItemId, sys, "mmHg", bp_time});
        tables.chart_events.push_back({adm_id, kDiastolicItemId, dia, "mmHg", bp_time});
    };

    for (std::size_t i = 0; i < n; ++i) {
        const detail::SynthAdmission& a = adms[i];
        const Patient& p = patients[a.patient_idx];
        const std::string adm_id = "A" + std::to_string(i + 1);
        out.ami_admission_ids.push_back(adm_id);
        out.planted_labels.push_back(a.label);
        emit_admission(adm_id, p, a, true);

        const std::size_t n_codes = 1 + static_cast<std::size_t>(eunit(event_rng) * 2.0) % 2;
        for (std::size_t c = 0; c < n_codes; ++c) {
            const char* code = kAmiCodes[static_cast<std::size_t>(eunit(event_rng) * 6.0) % 6];
            tables.diagnoses.push_back({adm_id, code});
            if (eunit(event_rng) < kDuplicateDiagRate) tables.diagnoses.push_back({adm_id, code});
        }
        if (eunit(event_rng) < 0.4)
            tables.diagnoses.push_back(
                {adm_id, kOtherCodes[static_cast<std::size_t>(eunit(event_rng) * 3.0) % 3]});

        const auto& treatments = treatment_categories();
        for (std::size_t t = 0; t < treatments.size(); ++t) {
            const double base = 0.04 + 0.24 * static_cast<double>((t * 7) % 10) / 10.0;
            const double w = (static_cast<double>((t * 13) % 5) - 2.0) / 2.0;
            const double pr = sigmoid(std::log(base / (1.0 - base)) + config.signal_treatment * w * a.z);
            if (eunit(event_rng) < pr) {
                tables.drg_codes.push_back({adm_id, "T" + std::to_string(t + 1), treatments[t]});
                if (eunit(event_rng) < kDuplicateDrgRate)
                    tables.drg_codes.push_back({adm_id, "T" + std::to_string(t + 1), treatments[t]});
            }
        }
        const auto& groups = comorbidity_groups();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double base = 0.015 + 0.035 * static_cast<double>((g * 3) % 4) / 3.0;
            const double w = 0.4 + 0.6 * static_cast<double>((g * 5) % 3) / 2.0;
            const double pr = sigmoid(std::log(base / (1.0 - base)) + config.signal_diagnostic * w * a.z);
            if (eunit(event_rng) < pr) {
                tables.drg_codes.push_back({adm_id, "C" + std::to_string(g + 1), groups[g]});
                if (eunit(event_rng) < kDuplicateDrgRate)
                    tables.drg_codes.push_back({adm_id, "C" + std::to_string(g + 1), groups[g]});
            }
        }
        emit_events(adm_id, a);
    }

    // extra non-qualifying admissions, excluded by cohort selection
    const std::size_t n_extra = static_cast<std::size_t>(kExtraAdmissionRate * static_cast<double>(n));
    for (std::size_t x = 0; x < n_extra; ++x) {
        Patient p;
        p.id = "P" + std::to_string(patients.size() + 1);
        p.gender = eunit(event_rng) < 0.5 ? "F" : "M";
        p.first_age = detail::clipd(65.0 + 14.0 * enormal(event_rng), 22.0, 97.0);
        detail::SynthAdmission a;
        a.z = enormal(event_rng);
        a.admit_secs = (epoch_day + static_cast<std::int64_t>(eunit(event_rng) * 4000.0)) * 86400;
        a.stay_days = detail::clipd(std::exp(1.2 + 0.4 * enormal(event_rng)), 0.2, 40.0);
        patients.push_back(p);

        PatientRecord rec;
        rec.patient_id = p.id;
        rec.gender = p.gender;
        rec.date_of_birth =
            Timestamp(a.admit_secs - static_cast<std::int64_t>(p.first_age * 365.25 * 86400.0));
        tables.patients.push_back(std::move(rec));

        const std::string adm_id = "X" + std::to_string(x + 1);
        emit_admission(adm_id, p, a, false);
        static const char* kExcluded[] = {"412", "414.01", "411.1", "V45.81"};
        tables.diagnoses.push_back(
            {adm_id, kExcluded[static_cast<std::size_t>(eunit(event_rng) * 4.0) % 4]});
    }

    return out;
}

// Generate and write the seven tables plus the echoed config and default
// plausibility ranges. Deterministic: same config + seed, same bytes.
inline SynthResult generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
    SynthResult result = generate_tables(config);
    const RawTables& t = result.tables;
    std::filesystem::create_directories(out_dir);
    const std::string hash = config_hash(config.canonical());
    char buf[64];
    const auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };

    {
        CsvWriter w(out_dir / "patients.csv");
        w.metadata("config_hash", hash);
        w.row({"patient_id", "gender", "date_of_birth", "date_of_death"});
        for (const auto& p : t.patients)
            w.row({p.patient_id, p.gender, p.date_of_birth.to_string(),
                   p.date_of_death ? p.date_of_death->to_string() : ""});
        w.close();
    }
    {
        CsvWriter w(out_dir / "admissions.csv");
        w.metadata("config_hash", hash);
        w.row({"admission_id", "patient_id", "admit_time", "discharge_time", "discharge_location",
               "religion", "ethnicity", "marital_status", "initial_diagnosis_text"});
        for (const auto& a : t.admissions)
            w.row({a.admission_id, a.patient_id, a.admit_time.to_string(),
                   a.discharge_time.to_string(), a.discharge_location, a.religion, a.ethnicity,
                   a.marital_status, a.initial_diagnosis_text});
        w.close();
    }
    {
        CsvWriter w(out_dir / "diagnoses.csv");
        w.metadata("config_hash", hash);
        w.row({"admission_id", "icd9_code"});
        for (const auto& d : t.diagnoses) w.row({d.admission_id, d.icd9_code});
        w.close();
    }
    {
        CsvWriter w(out_dir / "drg_codes.csv");
        w.metadata("config_hash", hash);
        w.row({"admission_id", "drg_code", "description"});
        for (const auto& d : t.drg_codes) w.row({d.admission_id, d.drg_code, d.description});
        w.close();
    }
    const auto write_events = [&](const std::filesystem::path& path,
                                  const std::vector<EventRow>& events) {
        CsvWriter w(path);
        w.metadata("config_hash", hash);
        w.row({"admission_id", "item_id", "value", "unit", "timestamp"});
        for (const auto& e : events)
            w.row({e.admission_id, std::to_string(e.item_id), fmt(e.value), e.unit,
                   e.timestamp.to_string()});
        w.close();
    };
    write_events(out_dir / "lab_events.csv", t.lab_events);
    write_events(out_dir / "chart_events.csv", t.chart_events);
    {
        CsvWriter w(out_dir / "lab_items.csv");
        w.metadata("config_hash", hash);
        w.row({"item_id", "label"});
        for (const auto& i : t.lab_items) w.row({std::to_string(i.item_id), i.label});
        w.close();
    }
    write_synth_config(config, out_dir / "synth_config.txt");
    write_plausibility_ranges(out_dir / "plausibility_ranges.csv", default_plausibility_ranges());
    return result;
}

}  // namespace amipred
