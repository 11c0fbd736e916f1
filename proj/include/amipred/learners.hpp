#pragma once

#include "amipred/learners/base.hpp"
#include "amipred/learners/boosting.hpp"
#include "amipred/learners/fnn.hpp"
#include "amipred/learners/linear.hpp"
#include "amipred/learners/naive_bayes.hpp"
#include "amipred/learners/oner.hpp"
#include "amipred/learners/stump.hpp"
#include "amipred/learners/tree.hpp"

namespace amipred {

// Deterministic given (spec.seed, data); hyperparameters are validated and
// filled with family defaults first.
inline std::unique_ptr<Model> train(const LearnerSpec& raw_spec, const TrainData& data) {
    if (data.x.rows() == 0) throw DataError("train: empty training set");
    if (data.x.rows() != data.y.size()) throw ContractError("train: label count mismatch");
    const LearnerSpec spec = resolve_spec(raw_spec);
    switch (spec.family) {
        case LearnerFamily::logistic: return train_logistic(spec, data);
        case LearnerFamily::sgd_logistic: return train_sgd_logistic(spec, data);
        case LearnerFamily::naive_bayes: return train_naive_bayes(spec, data);
        case LearnerFamily::oner: return train_oner(spec, data);
        case LearnerFamily::stump: return train_stump(spec, data);
        case LearnerFamily::tree: return train_tree(spec, data);
        case LearnerFamily::random_forest: return train_random_forest(spec, data);
        case LearnerFamily::adaboost: return train_adaboost(spec, data);
        case LearnerFamily::logitboost_simple_logistic: return train_logitboost(spec, data);
        case LearnerFamily::deep_fnn: return train_deep_fnn(spec, data);
    }
    throw ConfigError("train: unhandled learner family");
}

inline std::unique_ptr<Model> train(const LearnerSpec& spec, const Matrix& x,
                                    const std::vector<int>& y,
                                    const std::vector<Encoding>& encodings = {}) {
    return train(spec, TrainData{x, y, encodings});
}

constexpr const char* kModelFormatTag = "amipred-model";
constexpr int kModelFormatVersion = 1;

// Versioned structured text: format tag, optional config hash, family, then
// the family's own parameter block. Round-trips reproduce identical
// predictions.
inline void save_model(const Model& model, std::ostream& out, const std::string& hash = {}) {
    out << kModelFormatTag << " v" << kModelFormatVersion << "\n";
    if (!hash.empty()) out << "config_hash " << hash << "\n";
    out << "family " << to_string(model.family()) << "\n";
    model.save(out);
    out << "end\n";
}

inline std::unique_ptr<Model> load_model(std::istream& in) {
    std::string tag, version;
    in >> tag >> version;
    if (tag != kModelFormatTag || version != "v1")
        throw DataError("not an amipred model file (header '" + tag + " " + version + "')");
    std::string token;
    in >> token;
    if (token == "config_hash") {
        in >> token;  // hash value
        in >> token;
    }
    if (token != "family") throw DataError("model file: expected 'family', got '" + token + "'");
    std::string family_name;
    in >> family_name;
    const LearnerFamily family = learner_family_from_string(family_name);

    std::unique_ptr<Model> model;
    switch (family) {
        case LearnerFamily::logistic:
        case LearnerFamily::sgd_logistic:
            model = LogisticModel::load(in, family);
            break;
        case LearnerFamily::naive_bayes: model = NaiveBayesModel::load(in); break;
        case LearnerFamily::oner: model = OneRModel::load(in); break;
        case LearnerFamily::stump: model = StumpModel::load(in); break;
        case LearnerFamily::tree: model = TreeModel::load(in); break;
        case LearnerFamily::random_forest: model = RandomForestModel::load(in); break;
        case LearnerFamily::adaboost: model = AdaBoostModel::load(in); break;
        case LearnerFamily::logitboost_simple_logistic: model = LogitBoostModel::load(in); break;
        case LearnerFamily::deep_fnn: model = FnnModel::load(in); break;
    }
    detail::expect_token(in, "end");
    return model;
}

}  // namespace amipred
