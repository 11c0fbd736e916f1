#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "amipred/features.hpp"

using namespace amipred;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<AdmissionCase> sample_cases() {
    std::vector<AdmissionCase> cases;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    static const char* kEth[] = {"WHITE", "BLACK", "ASIAN"};
    static const char* kLoc[] = {"HOME", "SNF"};
    for (int i = 0; i < 40; ++i) {
        AdmissionCase c;
        c.admission.admission_id = "A" + std::to_string(i);
        c.admission.total_days = 1.0 + 9.0 * unit(rng);
        c.admission.admission_month = 1 + i % 12;
        c.admission.discharge_location = kLoc[i % 2];
        c.admission.er_initial_ami_flag = i % 3 == 0;
        c.admission.religion = i % 2 ? "CATHOLIC" : "NONE";
        c.admission.ethnicity = kEth[i % 3];
        c.admission.marital_status = i % 2 ? "MARRIED" : "SINGLE";
        c.patient.gender = i % 2 ? "M" : "F";
        c.age_at_admission = 50.0 + i;
        if (i % 4 == 0) c.treatments.insert("cardiac catheterization");
        if (i % 5 == 0) c.comorbidity_groups.insert("cancer");
        c.event_means[5003] = 1.0 + unit(rng);
        if (i % 3 != 0) c.event_means[5011] = 100.0 + 30.0 * unit(rng);  // sometimes missing
        c.label = i % 4 == 0 ? Label::positive : Label::negative;
        cases.push_back(std::move(c));
    }
    return cases;
}

}  // namespace

TEST_CASE("demographics schema has exactly the Table 1 fields") {
    const FeatureMatrix fm = build_dataset(sample_cases(), DatasetKind::demographics);
    bool has_age = false;
    for (const auto& col : fm.schema.columns) {
        CHECK(col.group == DatasetKind::demographics);
        if (col.name == "age") has_age = true;
        if (col.encoding == Encoding::one_hot_level)
            CHECK((col.field == "gender" || col.field == "religion" || col.field == "ethnicity" ||
                   col.field == "marital_status"));
    }
    CHECK(has_age);
    // age + gender(2) + religion(2) + ethnicity(3) + marital(2)
    CHECK(fm.cols() == 1 + 2 + 2 + 3 + 2);
}

TEST_CASE("treatment and diagnostic datasets carry the full category lists") {
    const auto cases = sample_cases();
    CHECK(build_dataset(cases, DatasetKind::treatment).cols() == 21);
    CHECK(build_dataset(cases, DatasetKind::diagnostic).cols() == 13);
}

TEST_CASE("combined equals the concatenation of the five groups") {
    const auto cases = sample_cases();
    const FeatureMatrix combined = build_dataset(cases, DatasetKind::combined);
    std::size_t expected_cols = 0;
    std::size_t offset = 0;
    for (DatasetKind kind : {DatasetKind::admission, DatasetKind::demographics,
                             DatasetKind::treatment, DatasetKind::diagnostic,
                             DatasetKind::lab_chart}) {
        const FeatureMatrix group = build_dataset(cases, kind);
        expected_cols += group.cols();
        for (std::size_t i = 0; i < group.rows(); ++i)
            for (std::size_t j = 0; j < group.cols(); ++j) {
                CHECK(combined.x.at(i, offset + j) == group.x.at(i, j));
                CHECK(combined.is_missing(i, offset + j) == group.is_missing(i, j));
            }
        offset += group.cols();
    }
    CHECK(combined.cols() == expected_cols);
}

TEST_CASE("one-hot blocks sum to one for seen levels, zero for unseen") {
    const auto cases = sample_cases();
    const FeatureMatrix fm = build_dataset(cases, DatasetKind::demographics);
    const auto gender_cols = fm.schema.field_columns("gender");
    REQUIRE(gender_cols.size() == 2);
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j : gender_cols) sum += fm.x.at(i, j);
        CHECK(sum == 1.0);
    }
    CHECK(encode_categorical(fm.schema, "gender", "M") == std::vector<double>{0.0, 1.0});
    CHECK(encode_categorical(fm.schema, "gender", "F") == std::vector<double>{1.0, 0.0});
    CHECK(encode_categorical(fm.schema, "gender", "UNKNOWN") == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(encode_categorical(fm.schema, "age", "50"), ContractError);
}

TEST_CASE("missing lab cells are masked and later imputed") {
    const auto cases = sample_cases();
    const FeatureMatrix fm = build_dataset(cases, DatasetKind::lab_chart);
    bool any_missing = false;
    for (std::size_t i = 0; i < fm.rows(); ++i)
        for (std::size_t j = 0; j < fm.cols(); ++j) any_missing |= fm.is_missing(i, j);
    CHECK(any_missing);

    const Standardizer st = Standardizer::fit(fm, all_rows(fm), true);
    const Matrix x = st.apply(fm, all_rows(fm));
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) CHECK(std::isfinite(x.at(i, j)));
}

TEST_CASE("standardizer matches the hand-computed example") {
    FeatureMatrix fm;
    fm.schema.columns.push_back({"v", DatasetKind::lab_chart, Encoding::numeric, "", ""});
    fm.x = Matrix(3, 1);
    fm.x.at(0, 0) = 2.0;
    fm.x.at(1, 0) = 4.0;
    fm.x.at(2, 0) = 6.0;
    fm.missing.assign(3, 0);
    fm.labels = {0, 1, 0};

    const Standardizer st = Standardizer::fit(fm, {0, 1, 2}, true);
    const Matrix x = st.apply(fm, {0, 1, 2});
    CHECK_THAT(x.at(0, 0), WithinAbs(-1.224744871391589, 1e-12));
    CHECK_THAT(x.at(1, 0), WithinAbs(0.0, 1e-12));
    CHECK_THAT(x.at(2, 0), WithinAbs(1.224744871391589, 1e-12));

    SECTION("test value at the train mean maps to zero") {
        double out[1];
        const double value = 4.0;
        const std::uint8_t missing = 0;
        st.transform_row(std::span<const double>(&value, 1), &missing, std::span<double>(out, 1));
        CHECK_THAT(out[0], WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("constant columns are centered only") {
    FeatureMatrix fm;
    fm.schema.columns.push_back({"v", DatasetKind::lab_chart, Encoding::numeric, "", ""});
    fm.x = Matrix(2, 1, 5.0);
    fm.missing.assign(2, 0);
    fm.labels = {0, 1};
    const Standardizer st = Standardizer::fit(fm, {0, 1}, true);
    const Matrix x = st.apply(fm, {0, 1});
    CHECK(x.at(0, 0) == 0.0);
    CHECK(x.at(1, 0) == 0.0);
}

TEST_CASE("fitted-and-applied columns are exactly normalized") {
    const auto cases = sample_cases();
    const FeatureMatrix fm = build_dataset(cases, DatasetKind::combined);
    const Standardizer st = Standardizer::fit(fm, all_rows(fm), true);
    const Matrix x = st.apply(fm, all_rows(fm));
    for (std::size_t j = 0; j < x.cols(); ++j) {
        bool has_missing = false;
        for (std::size_t i = 0; i < x.rows(); ++i) has_missing |= fm.is_missing(i, j);
        if (has_missing) continue;  // imputation shifts post-fill moments
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) mean += x.at(i, j);
        mean /= static_cast<double>(x.rows());
        CHECK_THAT(mean, WithinAbs(0.0, 1e-10));
        if (st.columns()[j].sd > 0.0) {
            double ss = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) ss += x.at(i, j) * x.at(i, j);
            CHECK_THAT(std::sqrt(ss / static_cast<double>(x.rows())), WithinAbs(1.0, 1e-10));
        }
    }
}

TEST_CASE("no leakage: fitted statistics ignore non-training rows") {
    const auto cases = sample_cases();
    FeatureMatrix fm = build_dataset(cases, DatasetKind::combined);
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < fm.rows(); i += 2) train_rows.push_back(i);

    const Standardizer before = Standardizer::fit(fm, train_rows, true);
    // perturb every held-out row wildly
    for (std::size_t i = 1; i < fm.rows(); i += 2)
        for (std::size_t j = 0; j < fm.cols(); ++j) fm.x.at(i, j) += 1e6;
    const Standardizer after = Standardizer::fit(fm, train_rows, true);

    REQUIRE(before.columns().size() == after.columns().size());
    for (std::size_t j = 0; j < before.columns().size(); ++j) {
        CHECK(before.columns()[j].mean == after.columns()[j].mean);
        CHECK(before.columns()[j].sd == after.columns()[j].sd);
    }
}

TEST_CASE("dataset export and import round-trip") {
    const auto cases = sample_cases();
    const FeatureMatrix fm = build_dataset(cases, DatasetKind::lab_chart);
    const auto dir = std::filesystem::temp_directory_path() / "amipred_features_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "lab_chart.csv";
    export_dataset(fm, path, "deadbeef");

    const FeatureMatrix back = import_dataset(path);
    REQUIRE(back.rows() == fm.rows());
    REQUIRE(back.cols() == fm.cols());
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        CHECK(back.labels[i] == fm.labels[i]);
        for (std::size_t j = 0; j < fm.cols(); ++j) {
            CHECK(back.is_missing(i, j) == fm.is_missing(i, j));
            if (!fm.is_missing(i, j)) CHECK(back.x.at(i, j) == fm.x.at(i, j));
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("dictionary labels name the lab columns") {
    const auto cases = sample_cases();
    const std::vector<LabItemRow> dictionary = {{5003, "Creatinine"}, {5011, "Glucose"}};
    const FeatureMatrix fm = build_dataset(cases, DatasetKind::lab_chart, dictionary);
    REQUIRE(fm.cols() == 2);
    CHECK(fm.schema.columns[0].name == "creatinine");
    CHECK(fm.schema.columns[1].name == "glucose");
}

TEST_CASE("unknown dataset kind is rejected") {
    CHECK_THROWS_AS(dataset_kind_from_string("bogus"), ConfigError);
    CHECK_THROWS_AS(build_dataset({}, DatasetKind::admission), DataError);
}
