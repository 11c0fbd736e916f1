#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "amipred/evaluate.hpp"
#include "amipred/synthgen.hpp"

using namespace amipred;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(std::uint64_t seed = 7) {
    SynthConfig c;
    c.n_admissions = 400;
    c.positive_rate = 0.3;
    c.masked_age_fraction = 0.03;
    c.missingness_rate = 0.1;
    c.seed = seed;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path dir;
    explicit TempDir(const std::string& name) : dir(fs::temp_directory_path() / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("generated labels hit the exact positive count") {
    SynthConfig c = small_config();
    c.n_admissions = 5436 / 4;  // keep the unit suite quick
    c.positive_rate = 1629.0 / 5436.0;
    const SynthResult r = generate_tables(c);
    long long positives = 0;
    for (int y : r.planted_labels) positives += y;
    CHECK(positives == std::llround(c.positive_rate * static_cast<double>(c.n_admissions)));
}

TEST_CASE("ingesting generated tables reproduces the planted labels exactly") {
    const SynthResult r = generate_tables(small_config());
    const std::vector<AdmissionCase> cases = select_cohort(r.tables);
    REQUIRE(cases.size() == r.planted_labels.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        CHECK(cases[i].admission.admission_id == r.ami_admission_ids[i]);
        CHECK(label_value(cases[i].label) == r.planted_labels[i]);
    }
}

TEST_CASE("cohort selection excludes the planted non-qualifying admissions") {
    const SynthResult r = generate_tables(small_config());
    CHECK(r.tables.admissions.size() > r.planted_labels.size());
    const std::vector<AdmissionCase> cases = select_cohort(r.tables);
    CHECK(cases.size() == r.planted_labels.size());
}

TEST_CASE("masked fraction zero keeps every recorded age at most 200") {
    SynthConfig c = small_config();
    c.masked_age_fraction = 0.0;
    const SynthResult r = generate_tables(c);
    std::map<std::string, const PatientRecord*> by_id;
    for (const auto& p : r.tables.patients) by_id[p.patient_id] = &p;
    for (const auto& a : r.tables.admissions) {
        const double recorded = age_at(a.admit_time, by_id.at(a.patient_id)->date_of_birth);
        CHECK(recorded <= 200.0);
    }
}

TEST_CASE("masked ages de-mask through the pipeline") {
    SynthConfig c = small_config(13);
    c.masked_age_fraction = 0.05;
    const SynthResult r = generate_tables(c);
    const std::vector<AdmissionCase> cases = select_cohort(r.tables);
    bool saw_demasked_old_age = false;
    for (const auto& cse : cases) {
        CHECK(cse.age_at_admission < 200.0);
        saw_demasked_old_age |= cse.age_at_admission > 89.0;
    }
    CHECK(saw_demasked_old_age);
}

TEST_CASE("every preprocessing rule fires on the default config") {
    const SynthResult r = generate_tables(small_config(3));
    CleanConfig config;
    config.ranges = default_plausibility_ranges();
    const Cohort cohort = build_cohort(r.tables, config);
    CHECK(cohort.report.lab_zero_removed > 0);
    CHECK(cohort.report.lab_implausible_removed + cohort.report.chart_implausible_removed > 0);
    CHECK(cohort.report.bp_pairs_swapped > 0);
    CHECK(cohort.report.duplicate_diagnosis_rows > 0);
    CHECK(cohort.report.duplicate_drg_rows > 0);
}

TEST_CASE("same config and seed produce byte-identical files") {
    TempDir a("amipred_synth_a"), b("amipred_synth_b");
    const SynthConfig c = small_config(21);
    generate(c, a.dir);
    generate(c, b.dir);
    for (const char* name : {"patients.csv", "admissions.csv", "diagnoses.csv", "drg_codes.csv",
                             "lab_events.csv", "chart_events.csv", "lab_items.csv",
                             "synth_config.txt", "plausibility_ranges.csv"}) {
        INFO(name);
        CHECK(slurp(a.dir / name) == slurp(b.dir / name));
    }
}

TEST_CASE("different seeds produce different cohorts") {
    const SynthResult r1 = generate_tables(small_config(1));
    const SynthResult r2 = generate_tables(small_config(2));
    CHECK(r1.planted_labels != r2.planted_labels);
}

TEST_CASE("synth config round-trips through its file format") {
    TempDir t("amipred_synth_cfg");
    SynthConfig c = small_config(5);
    c.signal_lab_chart = 2.5;
    c.signal_treatment = 0.75;
    write_synth_config(c, t.dir / "config.txt");
    const SynthConfig back = read_synth_config(t.dir / "config.txt");
    CHECK(back.canonical() == c.canonical());
    CHECK_THROWS_AS(read_synth_config(t.dir / "missing.txt"), ConfigError);
}

TEST_CASE("config validation") {
    SynthConfig c = small_config();
    c.n_admissions = 5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.positive_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.missingness_rate = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("planted signal is learnable in the signalled group only") {
    SynthConfig c = small_config(77);
    c.n_admissions = 700;
    c.signal_lab_chart = 2.5;  // high signal in exactly one group
    const SynthResult r = generate_tables(c);
    CleanConfig clean;
    clean.ranges = default_plausibility_ranges();
    const Cohort cohort = build_cohort(r.tables, clean);

    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    spec.seed = 1;

    const FeatureMatrix labs =
        build_dataset(cohort.cases, DatasetKind::lab_chart, r.tables.lab_items);
    const EvalReport lab_report = cross_validate(spec, labs, 10, 5, 2);
    CHECK(lab_report.auc >= 0.85);

    // the treatment group carries no signal under this config
    const FeatureMatrix treatment =
        build_dataset(cohort.cases, DatasetKind::treatment, r.tables.lab_items);
    const EvalReport treatment_report = cross_validate(spec, treatment, 10, 5, 2);
    CHECK(treatment_report.auc >= 0.45);
    CHECK(treatment_report.auc <= 0.55);
}
