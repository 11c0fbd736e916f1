#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "amipred/evaluate.hpp"

using namespace amipred;
using Catch::Matchers::WithinAbs;

namespace {

// exhaustive pair-counting AUC with half credit for ties
double auc_pair_oracle(const std::vector<int>& y, const std::vector<double>& s) {
    double wins = 0.0;
    long long pairs = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j]) continue;
            ++pairs;
            if (s[i] > s[j])
                wins += 1.0;
            else if (s[i] == s[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

FeatureMatrix separable_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.25);
    FeatureMatrix fm;
    for (std::size_t j = 0; j < p; ++j)
        fm.schema.columns.push_back(
            {"f" + std::to_string(j), DatasetKind::lab_chart, Encoding::numeric, "", ""});
    fm.x = Matrix(n, p);
    fm.missing.assign(n * p, 0);
    fm.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fm.labels[i] = i % 3 == 0 ? 1 : 0;  // about one third positive
        const double center = fm.labels[i] ? 1.5 : -1.5;
        for (std::size_t j = 0; j < p; ++j) fm.x.at(i, j) = center + noise(rng);
    }
    return fm;
}

}  // namespace

TEST_CASE("stratified_folds invariants on the worked example") {
    // 10 instances, 3 positive, k = 5
    const std::vector<int> labels = {1, 0, 0, 1, 0, 0, 1, 0, 0, 0};
    const FoldAssignment fa = stratified_folds(labels, 5, 42);

    std::vector<std::size_t> sizes(5, 0), positives(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        sizes[fa.assignment[i]]++;
        if (labels[i]) positives[fa.assignment[i]]++;
    }
    for (std::size_t f = 0; f < 5; ++f) CHECK(sizes[f] == 2);
    std::size_t with_one = 0, with_zero = 0;
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(positives[f] <= 1);
        (positives[f] == 1 ? with_one : with_zero)++;
    }
    CHECK(with_one == 3);
    CHECK(with_zero == 2);
}

TEST_CASE("stratified_folds determinism and leave-one-out") {
    const std::vector<int> labels = {1, 0, 1, 0, 1, 0};
    CHECK(stratified_folds(labels, 3, 7).assignment == stratified_folds(labels, 3, 7).assignment);

    const FoldAssignment loo = stratified_folds(labels, 6, 7);
    std::vector<bool> seen(6, false);
    for (std::size_t f : loo.assignment) {
        CHECK_FALSE(seen[f]);
        seen[f] = true;
    }
}

TEST_CASE("stratified_folds property sweep over random shapes") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> n_dist(4, 200);
        const std::size_t n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> k_dist(2, std::min<std::size_t>(n, 12));
        const std::size_t k = k_dist(rng);
        std::uniform_real_distribution<double> ratio(0.05, 0.95);
        const double pos_rate = ratio(rng);
        std::vector<int> labels(n);
        std::bernoulli_distribution coin(pos_rate);
        long long pos = 0;
        for (auto& y : labels) pos += (y = coin(rng));
        if (pos == 0) labels[0] = 1;
        if (pos == static_cast<long long>(n)) labels[0] = 0;

        const FoldAssignment fa = stratified_folds(labels, k, trial);

        std::vector<long long> sizes(k, 0), positives(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(fa.assignment[i] < k);
            sizes[fa.assignment[i]]++;
            positives[fa.assignment[i]] += labels[i];
        }
        const auto [min_s, max_s] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*max_s - *min_s <= 1);
        const auto [min_p, max_p] = std::minmax_element(positives.begin(), positives.end());
        CHECK(*max_p - *min_p <= 1);
        long long total = 0;
        for (long long s : sizes) total += s;
        CHECK(total == static_cast<long long>(n));
    }
}

TEST_CASE("stratified_folds input validation") {
    CHECK_THROWS_AS(stratified_folds({1, 0}, 3, 0), ConfigError);
    CHECK_THROWS_AS(stratified_folds({1, 1, 1}, 2, 0), DataError);
    CHECK_THROWS_AS(stratified_folds({1, 0, 1}, 1, 0), ConfigError);
}

TEST_CASE("confusion_metrics worked example") {
    // TP=3 FP=1 FN=2 TN=4
    const std::vector<int> truth = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const std::vector<int> pred = {1, 1, 1, 0, 0, 1, 0, 0, 0, 0};
    const Metrics m = confusion_metrics(truth, pred);
    CHECK(m.tp == 3);
    CHECK(m.fp == 1);
    CHECK(m.fn == 2);
    CHECK(m.tn == 4);
    CHECK_THAT(m.precision, WithinAbs(0.75, 1e-12));
    CHECK_THAT(m.recall, WithinAbs(0.6, 1e-12));
    CHECK_THAT(m.f_measure, WithinAbs(2.0 * 0.75 * 0.6 / 1.35, 1e-12));
    CHECK_THAT(m.accuracy, WithinAbs(0.7, 1e-12));
    CHECK_FALSE(m.precision_degenerate);
}

TEST_CASE("confusion_metrics identities hold over a small grid") {
    for (long long tp = 0; tp <= 4; ++tp)
        for (long long fp = 0; fp <= 4; ++fp)
            for (long long fn = 0; fn <= 4; ++fn)
                for (long long tn = 0; tn <= 4; ++tn) {
                    if (tp + fp + fn + tn == 0) continue;
                    std::vector<int> truth, pred;
                    for (long long i = 0; i < tp; ++i) truth.push_back(1), pred.push_back(1);
                    for (long long i = 0; i < fp; ++i) truth.push_back(0), pred.push_back(1);
                    for (long long i = 0; i < fn; ++i) truth.push_back(1), pred.push_back(0);
                    for (long long i = 0; i < tn; ++i) truth.push_back(0), pred.push_back(0);
                    const Metrics m = confusion_metrics(truth, pred);
                    CHECK(m.tp == tp);
                    CHECK(m.fp == fp);
                    CHECK(m.fn == fn);
                    CHECK(m.tn == tn);
                    CHECK_THAT(m.accuracy, WithinAbs(static_cast<double>(tp + tn) /
                                                         static_cast<double>(tp + fp + fn + tn),
                                                     1e-12));
                    if (m.precision + m.recall > 0)
                        CHECK_THAT(m.f_measure, WithinAbs(2 * m.precision * m.recall /
                                                              (m.precision + m.recall),
                                                          1e-12));
                    if (tp + fp == 0) CHECK(m.precision_degenerate);
                }
}

TEST_CASE("confusion_metrics edge behavior") {
    CHECK(confusion_metrics({1, 0}, {1, 0}).accuracy == 1.0);
    const Metrics all_neg = confusion_metrics({1, 0, 1}, {0, 0, 0});
    CHECK(all_neg.recall == 0.0);
    CHECK(all_neg.precision_degenerate);
    CHECK_THROWS_AS(confusion_metrics({1}, {1, 0}), ContractError);
    CHECK_THROWS_AS(confusion_metrics({}, {}), DataError);
}

TEST_CASE("roc_curve shapes") {
    SECTION("perfect separation") {
        const auto points = roc_curve({1, 0}, {0.9, 0.1});
        REQUIRE(points.size() == 3);
        CHECK(points[0].fpr == 0.0);
        CHECK(points[0].tpr == 0.0);
        CHECK(points[1].fpr == 0.0);
        CHECK(points[1].tpr == 1.0);
        CHECK(points[2].fpr == 1.0);
        CHECK(points[2].tpr == 1.0);
    }
    SECTION("all-equal scores collapse to the endpoints") {
        const auto points = roc_curve({1, 0, 1, 0}, {0.5, 0.5, 0.5, 0.5});
        REQUIRE(points.size() == 2);
        CHECK(points[1].fpr == 1.0);
        CHECK(points[1].tpr == 1.0);
    }
    SECTION("staircase example with AUC 0.75") {
        const std::vector<int> y = {1, 1, 0, 0};
        const std::vector<double> s = {0.9, 0.4, 0.5, 0.1};
        CHECK_THAT(auc(y, s), WithinAbs(0.75, 1e-12));
        CHECK_THAT(auc_pair_oracle(y, s), WithinAbs(0.75, 1e-12));
    }
    SECTION("monotone non-decreasing along the curve") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<int> y(50);
        std::vector<double> s(50);
        for (std::size_t i = 0; i < 50; ++i) {
            y[i] = i % 2;
            s[i] = std::round(u(rng) * 10.0) / 10.0;
        }
        const auto points = roc_curve(y, s);
        for (std::size_t i = 1; i < points.size(); ++i) {
            CHECK(points[i].fpr >= points[i - 1].fpr);
            CHECK(points[i].tpr >= points[i - 1].tpr);
            CHECK(points[i].threshold < points[i - 1].threshold);
        }
    }
    SECTION("single-class truth is an error") {
        CHECK_THROWS_AS(roc_curve({1, 1}, {0.5, 0.6}), DataError);
        CHECK_THROWS_AS(auc({0, 0}, {0.5, 0.6}), DataError);
    }
}

TEST_CASE("auc equals brute-force pair counting on 200 random tied score sets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<std::size_t> n_dist(2, 500);
        const std::size_t n = n_dist(rng);
        std::vector<int> y(n);
        std::vector<double> s(n);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::uniform_int_distribution<int> grid(2, 25);
        const int levels = grid(rng);  // coarse grid forces ties
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = u(rng) < 0.4;
            (y[i] ? pos : neg) = true;
            s[i] = std::floor(u(rng) * levels) / levels;
        }
        if (!pos) y[0] = 1;
        if (!neg) y[n > 1 ? 1 : 0] = 0;
        if (n == 1) continue;
        CHECK_THAT(auc(y, s), WithinAbs(auc_pair_oracle(y, s), 1e-12));
    }
}

TEST_CASE("cross_validate pools folds deterministically") {
    const FeatureMatrix fm = separable_matrix(90, 3, 7);
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    spec.seed = 11;

    const EvalReport a = cross_validate(spec, fm, 5, 123);
    const EvalReport b = cross_validate(spec, fm, 5, 123);
    CHECK(a.pooled_scores == b.pooled_scores);
    CHECK(a.auc == b.auc);
    CHECK(a.pooled.accuracy == b.pooled.accuracy);
    REQUIRE(a.per_fold.size() == 5);

    SECTION("parallel fold evaluation matches serial") {
        const EvalReport par = cross_validate(spec, fm, 5, 123, 4);
        CHECK(par.pooled_scores == a.pooled_scores);
        CHECK(par.auc == a.auc);
    }
    SECTION("fold test sets partition the instances") {
        const FoldAssignment fa = stratified_folds(fm.labels, 5, 123);
        std::vector<int> covered(fm.rows(), 0);
        for (std::size_t f = 0; f < 5; ++f)
            for (std::size_t row : fa.test_rows(f)) covered[row]++;
        for (int c : covered) CHECK(c == 1);
    }
}

TEST_CASE("cross_validate reaches near-perfect accuracy on separable data") {
    const FeatureMatrix fm = separable_matrix(120, 3, 17);
    LearnerSpec spec;
    spec.family = LearnerFamily::logistic;
    spec.seed = 3;
    const EvalReport report = cross_validate(spec, fm, 10, 99);
    CHECK(report.pooled.accuracy >= 0.99);
    CHECK(report.auc >= 0.99);
}

TEST_CASE("cross_validate leaks nothing from held-out rows") {
    // perturbing test rows must not change the fitted per-fold statistics;
    // observable consequence: training on perturbed-test data yields the
    // same per-fold models, hence identical scores up to the perturbed
    // inputs themselves. Verify directly on the standardizer path.
    FeatureMatrix fm = separable_matrix(60, 2, 27);
    const FoldAssignment fa = stratified_folds(fm.labels, 5, 55);
    const auto train_rows = fa.train_rows(0);
    const Standardizer before = Standardizer::fit(fm, train_rows, true);
    for (std::size_t row : fa.test_rows(0))
        for (std::size_t j = 0; j < fm.cols(); ++j) fm.x.at(row, j) = 1e9;
    const Standardizer after = Standardizer::fit(fm, train_rows, true);
    for (std::size_t j = 0; j < fm.cols(); ++j) {
        CHECK(before.columns()[j].mean == after.columns()[j].mean);
        CHECK(before.columns()[j].sd == after.columns()[j].sd);
    }
}
