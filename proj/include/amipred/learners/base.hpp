#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "amipred/features.hpp"
#include "amipred/matrix.hpp"

namespace amipred {

enum class LearnerFamily {
    logistic,
    sgd_logistic,
    naive_bayes,
    oner,
    stump,
    tree,
    random_forest,
    adaboost,
    logitboost_simple_logistic,
    deep_fnn,
};

inline const char* to_string(LearnerFamily f) {
    switch (f) {
        case LearnerFamily::logistic: return "logistic";
        case LearnerFamily::sgd_logistic: return "sgd_logistic";
        case LearnerFamily::naive_bayes: return "naive_bayes";
        case LearnerFamily::oner: return "oner";
        case LearnerFamily::stump: return "stump";
        case LearnerFamily::tree: return "tree";
        case LearnerFamily::random_forest: return "random_forest";
        case LearnerFamily::adaboost: return "adaboost";
        case LearnerFamily::logitboost_simple_logistic: return "logitboost_simple_logistic";
        case LearnerFamily::deep_fnn: return "deep_fnn";
    }
    return "?";
}

inline const std::vector<LearnerFamily>& all_learner_families() {
    static const std::vector<LearnerFamily> kFamilies = {
        LearnerFamily::logistic,       LearnerFamily::sgd_logistic,
        LearnerFamily::naive_bayes,    LearnerFamily::oner,
        LearnerFamily::stump,          LearnerFamily::tree,
        LearnerFamily::random_forest,  LearnerFamily::adaboost,
        LearnerFamily::logitboost_simple_logistic, LearnerFamily::deep_fnn,
    };
    return kFamilies;
}

inline LearnerFamily learner_family_from_string(const std::string& s) {
    for (LearnerFamily f : all_learner_families())
        if (s == to_string(f)) return f;
    throw ConfigError("unknown learner family: '" + s + "'");
}

struct LearnerSpec {
    LearnerFamily family = LearnerFamily::logistic;
    std::map<std::string, double> hyperparameters;
    std::uint64_t seed = 0;
};

// Family defaults standing in for the reference tooling's "default
// configuration".
inline std::map<std::string, double> default_hyperparameters(LearnerFamily f) {
    switch (f) {
        case LearnerFamily::logistic:
            return {{"ridge", 1e-8}, {"learning_rate", 0.1}, {"max_iterations", 10000}, {"tolerance", 1e-6}};
        case LearnerFamily::sgd_logistic:
            return {{"batch_size", 32}, {"learning_rate", 0.01}, {"epochs", 50}};
        case LearnerFamily::naive_bayes:
            return {{"variance_floor", 1e-9}};
        case LearnerFamily::oner:
            return {{"min_bucket", 6}};
        case LearnerFamily::stump:
            return {};
        case LearnerFamily::tree:
            return {{"max_depth", 25}, {"min_leaf", 2}};
        case LearnerFamily::random_forest:
            return {{"trees", 100}, {"max_depth", 0}, {"min_leaf", 1}};
        case LearnerFamily::adaboost:
            return {{"rounds", 10}};
        case LearnerFamily::logitboost_simple_logistic:
            return {{"rounds", 10}, {"z_max", 3}};
        case LearnerFamily::deep_fnn:
            return {{"learning_rate", 0.05}, {"batch_size", 64}, {"epochs", 300}};
    }
    return {};
}

// Fill in defaults and reject unknown or out-of-range values.
inline LearnerSpec resolve_spec(const LearnerSpec& spec) {
    LearnerSpec out = spec;
    auto defaults = default_hyperparameters(spec.family);
    for (const auto& [key, value] : spec.hyperparameters) {
        if (!defaults.count(key))
            throw ConfigError(std::string("unknown hyperparameter '") + key + "' for " +
                              to_string(spec.family));
        if (!std::isfinite(value) || value < 0)
            throw ConfigError(std::string("invalid value for hyperparameter '") + key + "'");
    }
    for (const auto& [key, value] : defaults)
        if (!out.hyperparameters.count(key)) out.hyperparameters[key] = value;
    return out;
}

// Training view: rows already imputed (and standardized where the family
// wants it), labels in {0,1}, one encoding tag per column.
struct TrainData {
    const Matrix& x;
    const std::vector<int>& y;
    std::vector<Encoding> encodings;  // empty = all numeric

    Encoding encoding(std::size_t j) const {
        return encodings.empty() ? Encoding::numeric : encodings[j];
    }
};

inline void require_both_classes(const std::vector<int>& y, const char* family) {
    bool pos = false, neg = false;
    for (int v : y) (v ? pos : neg) = true;
    if (!pos || !neg)
        throw DataError(std::string(family) + ": training set contains a single class");
}

// Gradient-trained families consume standardized inputs; the rest take raw
// columns.
inline bool wants_standardized_inputs(LearnerFamily f) {
    return f == LearnerFamily::logistic || f == LearnerFamily::sgd_logistic ||
           f == LearnerFamily::deep_fnn;
}

class Model {
public:
    virtual ~Model() = default;
    virtual LearnerFamily family() const = 0;
    // Probability of the positive class (death within one year).
    virtual double predict_proba(std::span<const double> row) const = 0;
    virtual void save(std::ostream& out) const = 0;

    bool predict_class(std::span<const double> row) const { return predict_proba(row) >= 0.5; }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow
inline double log1pexp(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// splitmix64; derives independent RNG streams from (seed, stream index) so
// parallel and serial training agree.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace detail {

inline void write_doubles(std::ostream& out, std::span<const double> values) {
    out.precision(17);
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << values[i];
    out << "\n";
}

inline void read_doubles(std::istream& in, std::span<double> values) {
    for (double& v : values) in >> v;
}

inline void expect_token(std::istream& in, const std::string& expected) {
    std::string tok;
    in >> tok;
    if (tok != expected)
        throw DataError("model file: expected '" + expected + "', got '" + tok + "'");
}

// operator>> rejects "inf"; thresholds can legitimately be infinite
inline void write_double_token(std::ostream& out, double v) {
    if (std::isinf(v))
        out << (v > 0 ? "inf" : "-inf");
    else
        out << v;
}

inline double read_double_token(std::istream& in) {
    std::string tok;
    in >> tok;
    if (tok == "inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        return std::stod(tok);
    } catch (const std::exception&) {
        throw DataError("model file: bad number '" + tok + "'");
    }
}

}  // namespace detail

}  // namespace amipred
