#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "amipred/ingest.hpp"

using namespace amipred;
namespace fs = std::filesystem;

namespace {

struct TableDir {
    fs::path dir;

    explicit TableDir(const std::string& name) {
        dir = fs::temp_directory_path() / ("amipred_ingest_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        file("patients.csv", "patient_id,gender,date_of_birth,date_of_death\n");
        file("admissions.csv",
             "admission_id,patient_id,admit_time,discharge_time,discharge_location,religion,"
             "ethnicity,marital_status,initial_diagnosis_text\n");
        file("diagnoses.csv", "admission_id,icd9_code\n");
        file("drg_codes.csv", "admission_id,drg_code,description\n");
        file("lab_events.csv", "admission_id,item_id,value,unit,timestamp\n");
        file("chart_events.csv", "admission_id,item_id,value,unit,timestamp\n");
        file("lab_items.csv", "item_id,label\n");
    }
    ~TableDir() { fs::remove_all(dir); }

    void file(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name);
        out << content;
    }
    void append(const std::string& name, const std::string& lines) {
        std::ofstream out(dir / name, std::ios::app);
        out << lines;
    }
    RawTables load() const { return load_tables(TablePaths::in_dir(dir)); }
};

}  // namespace

TEST_CASE("icd9 inclusion range") {
    CHECK(icd9_in_ami_range("410.71"));
    CHECK(icd9_in_ami_range("410.0"));
    CHECK(icd9_in_ami_range("411.0"));
    CHECK(icd9_in_ami_range("410"));
    CHECK(icd9_in_ami_range("411"));
    CHECK_FALSE(icd9_in_ami_range("412"));
    CHECK_FALSE(icd9_in_ami_range("411.1"));
    CHECK_FALSE(icd9_in_ami_range("409.99"));
    CHECK_FALSE(icd9_in_ami_range("V45.81"));
    CHECK_FALSE(icd9_in_ami_range(""));
}

TEST_CASE("er_initial_ami text derivation") {
    CHECK(er_initial_ami("Acute myocardial infarction"));
    CHECK(er_initial_ami("MYOCARDIAL INFARCTION"));
    CHECK(er_initial_ami("Rule out MI"));
    CHECK(er_initial_ami("rule out acute MI"));
    CHECK_FALSE(er_initial_ami("rule out admission"));  // "mi" must be a word
    CHECK_FALSE(er_initial_ami("CHF exacerbation"));
    CHECK_FALSE(er_initial_ami("Chest pain"));
    CHECK_FALSE(er_initial_ami(""));
}

TEST_CASE("dedup_codes") {
    using Pair = std::pair<std::string, std::string>;
    SECTION("exact duplicates collapse") {
        const std::vector<Pair> out = dedup_codes({{"A", "410.71"}, {"A", "410.71"}});
        REQUIRE(out.size() == 1);
        CHECK(out[0] == Pair{"A", "410.71"});
    }
    SECTION("distinct codes for one admission are both counted") {
        const std::vector<Pair> out = dedup_codes({{"A", "410.71"}, {"A", "411.0"}});
        CHECK(out.size() == 2);
    }
    SECTION("empty input") { CHECK(dedup_codes({}).empty()); }
    SECTION("idempotent and order-preserving") {
        const std::vector<Pair> rows = {{"B", "x"}, {"A", "y"}, {"B", "x"}, {"A", "x"}, {"A", "y"}};
        const std::vector<Pair> once = dedup_codes(rows);
        CHECK(once == std::vector<Pair>{{"B", "x"}, {"A", "y"}, {"A", "x"}});
        CHECK(dedup_codes(once) == once);
    }
}

TEST_CASE("load_tables parses and validates") {
    TableDir t("load");
    t.append("patients.csv", "P1,M,2030-01-01,\nP2,F,2040-06-15,2101-03-01 12:00:00\n");
    t.append("admissions.csv",
             "A1,P1,2100-01-01 08:00:00,2100-01-05 08:00:00,HOME,NONE,WHITE,MARRIED,Chest pain\n"
             "A2,P2,2100-02-01,2100-02-03,SNF,CATHOLIC,ASIAN,SINGLE,Rule out MI\n");
    t.append("diagnoses.csv", "A1,410.71\nA2,412\n");
    t.append("drg_codes.csv", "A1,T1,Cardiac catheterization\n");
    t.append("lab_events.csv", "A1,5003,1.4,mg/dL,2100-01-02 06:00:00\n");
    t.append("chart_events.csv", "A1,6003,88,bpm,2100-01-02 06:00:00\n");
    t.append("lab_items.csv", "5003,Creatinine\n6003,Heart rate\n");

    const RawTables tables = t.load();
    CHECK(tables.patients.size() == 2);
    CHECK(tables.admissions.size() == 2);
    CHECK(tables.diagnoses.size() == 2);
    CHECK(tables.drg_codes.size() == 1);
    CHECK(tables.lab_events.size() == 1);
    CHECK(tables.chart_events.size() == 1);
    CHECK(tables.lab_items.size() == 2);

    CHECK(tables.admissions[0].total_days == 4.0);
    CHECK(tables.admissions[0].admission_month == 1);
    CHECK_FALSE(tables.admissions[0].er_initial_ami_flag);
    CHECK(tables.admissions[1].er_initial_ami_flag);
    CHECK(tables.patients[1].date_of_death.has_value());
}

TEST_CASE("load_tables reports dangling keys with the offending row") {
    TableDir t("dangling");
    t.append("patients.csv", "P1,M,2030-01-01,\n");
    t.append("admissions.csv", "A1,P1,2100-01-01,2100-01-02,HOME,NONE,WHITE,MARRIED,x\n");
    t.append("diagnoses.csv", "A9,410.71\n");
    try {
        t.load();
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("A9") != std::string::npos);
        CHECK(what.find("diagnoses.csv:2") != std::string::npos);
    }
}

TEST_CASE("load_tables rejects malformed rows with line numbers") {
    TableDir t("malformed");
    t.append("patients.csv", "P1,M,2030-01-01\n");  // missing a field
    try {
        t.load();
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("patients.csv:2") != std::string::npos);
    }
}

TEST_CASE("empty admissions file yields zero cases downstream") {
    TableDir t("empty");
    t.append("patients.csv", "P1,M,2030-01-01,\n");
    const RawTables tables = t.load();
    CHECK(select_cohort(tables).empty());
}

TEST_CASE("select_cohort keeps qualifying admissions only") {
    TableDir t("cohort");
    t.append("patients.csv", "P1,M,2030-01-01,2101-07-20\n");
    t.append("admissions.csv",
             "A1,P1,2100-01-01,2100-01-05,HOME,NONE,WHITE,MARRIED,Chest pain\n"
             "A2,P1,2101-02-01,2101-02-04,HOME,NONE,WHITE,MARRIED,MYOCARDIAL INFARCTION\n"
             "A3,P1,2101-06-15,2101-06-20,HOSPICE,NONE,WHITE,MARRIED,Syncope\n");
    t.append("diagnoses.csv", "A1,410.71\nA2,412\nA2,411.0\nA3,428.0\n");
    const std::vector<AdmissionCase> cases = select_cohort(t.load());
    // 3 admissions, 2 qualifying
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].admission.admission_id == "A1");
    CHECK(cases[1].admission.admission_id == "A2");
    // labels from the shared death date: A1 is over a year out, A2 within
    CHECK(cases[0].label == Label::negative);
    CHECK(cases[1].label == Label::positive);

    SECTION("brute-force rescan agrees with the inclusion predicate") {
        const RawTables tables = t.load();
        for (const auto& adm : tables.admissions) {
            bool qualifies = false;
            for (const auto& d : tables.diagnoses)
                if (d.admission_id == adm.admission_id && icd9_in_ami_range(d.icd9_code))
                    qualifies = true;
            bool emitted = false;
            for (const auto& c : cases) emitted |= c.admission.admission_id == adm.admission_id;
            CHECK(emitted == qualifies);
        }
    }
}

TEST_CASE("select_cohort maps DRG descriptions onto the category lists") {
    TableDir t("drg");
    t.append("patients.csv", "P1,F,2035-01-01,\n");
    t.append("admissions.csv", "A1,P1,2100-01-01,2100-01-05,HOME,NONE,WHITE,MARRIED,x\n");
    t.append("diagnoses.csv", "A1,410.9\n");
    t.append("drg_codes.csv",
             "A1,T11,Coronary bypass with PTCA\n"
             "A1,T11,Coronary bypass with PTCA\n"   // duplicate row collapses
             "A1,C1,CANCER\n"                        // case-insensitive match
             "A1,Z9,Something unrecognized\n");
    const std::vector<AdmissionCase> cases = select_cohort(t.load());
    REQUIRE(cases.size() == 1);
    CHECK(cases[0].treatments == std::set<std::string>{"coronary bypass with ptca"});
    CHECK(cases[0].comorbidity_groups == std::set<std::string>{"cancer"});
}

TEST_CASE("select_cohort de-masks ages") {
    TableDir t("mask");
    // dob 300 years before admission: recorded age 300, true age 89
    t.append("patients.csv", "P1,F,1800-01-01,\n");
    t.append("admissions.csv", "A1,P1,2100-01-01,2100-01-02,HOME,NONE,WHITE,MARRIED,x\n");
    t.append("diagnoses.csv", "A1,410.0\n");
    const std::vector<AdmissionCase> cases = select_cohort(t.load());
    REQUIRE(cases.size() == 1);
    CHECK_THAT(cases[0].age_at_admission, Catch::Matchers::WithinAbs(89.0, 0.1));
}

TEST_CASE("ingestion is deterministic") {
    TableDir t("determinism");
    t.append("patients.csv", "P1,M,2030-01-01,\nP2,F,2031-01-01,2100-06-01\n");
    t.append("admissions.csv",
             "A1,P1,2100-01-01,2100-01-05,HOME,NONE,WHITE,MARRIED,x\n"
             "A2,P2,2100-02-01,2100-02-03,SNF,NONE,BLACK,SINGLE,y\n");
    t.append("diagnoses.csv", "A1,410.1\nA2,410.2\n");
    const std::vector<AdmissionCase> first = select_cohort(t.load());
    const std::vector<AdmissionCase> second = select_cohort(t.load());
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].admission.admission_id == second[i].admission.admission_id);
        CHECK(first[i].label == second[i].label);
    }
}
