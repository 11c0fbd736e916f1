#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "amipred/core.hpp"
#include "amipred/csv.hpp"
#include "amipred/ingest.hpp"
#include "amipred/matrix.hpp"

namespace amipred {

enum class DatasetKind { admission, demographics, treatment, diagnostic, lab_chart, combined };

inline const char* to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::admission: return "admission";
        case DatasetKind::demographics: return "demographics";
        case DatasetKind::treatment: return "treatment";
        case DatasetKind::diagnostic: return "diagnostic";
        case DatasetKind::lab_chart: return "lab_chart";
        case DatasetKind::combined: return "combined";
    }
    return "?";
}

inline DatasetKind dataset_kind_from_string(const std::string& s) {
    for (DatasetKind k : {DatasetKind::admission, DatasetKind::demographics, DatasetKind::treatment,
                          DatasetKind::diagnostic, DatasetKind::lab_chart, DatasetKind::combined})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown dataset kind: '" + s + "'");
}

inline const std::vector<DatasetKind>& all_dataset_kinds() {
    static const std::vector<DatasetKind> kKinds = {
        DatasetKind::admission, DatasetKind::demographics, DatasetKind::treatment,
        DatasetKind::diagnostic, DatasetKind::lab_chart, DatasetKind::combined};
    return kKinds;
}

enum class Encoding { numeric, one_hot_level, binary_flag };

struct FeatureDesc {
    std::string name;
    DatasetKind group = DatasetKind::admission;
    Encoding encoding = Encoding::numeric;
    std::string field;  // source field for one-hot levels
    std::string level;  // category value this column indicates
};

struct FeatureSchema {
    std::vector<FeatureDesc> columns;

    std::size_t size() const { return columns.size(); }

    std::vector<std::size_t> field_columns(const std::string& field) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].encoding == Encoding::one_hot_level && columns[i].field == field)
                idx.push_back(i);
        return idx;
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(columns.size());
        for (const auto& c : columns) out.push_back(c.name);
        return out;
    }
};

struct FeatureMatrix {
    FeatureSchema schema;
    Matrix x;
    std::vector<std::uint8_t> missing;  // row-major n x p, 1 = missing
    std::vector<int> labels;            // 0/1 per row

    std::size_t rows() const { return x.rows(); }
    std::size_t cols() const { return x.cols(); }
    bool is_missing(std::size_t r, std::size_t c) const { return missing[r * x.cols() + c] != 0; }
};

namespace detail {

inline std::string sanitize_name(const std::string& s) {
    std::string out;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
            out += static_cast<char>(std::tolower(c));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

struct CategoricalField {
    std::string field;
    std::vector<std::string> levels;  // sorted distinct observed values
};

inline CategoricalField observe_levels(const std::vector<AdmissionCase>& cases,
                                       const std::string& field,
                                       const std::string& (*get)(const AdmissionCase&)) {
    std::set<std::string> seen;
    for (const auto& c : cases) seen.insert(get(c));
    return {field, {seen.begin(), seen.end()}};
}

}  // namespace detail

namespace detail {

inline const std::string& get_gender(const AdmissionCase& c) { return c.patient.gender; }
inline const std::string& get_religion(const AdmissionCase& c) { return c.admission.religion; }
inline const std::string& get_ethnicity(const AdmissionCase& c) { return c.admission.ethnicity; }
inline const std::string& get_marital(const AdmissionCase& c) { return c.admission.marital_status; }
inline const std::string& get_location(const AdmissionCase& c) {
    return c.admission.discharge_location;
}

struct GroupBuilder {
    FeatureSchema schema;
    std::vector<CategoricalField> categoricals;

    void numeric(const std::string& name, DatasetKind group) {
        schema.columns.push_back({name, group, Encoding::numeric, "", ""});
    }
    void flag(const std::string& name, DatasetKind group) {
        schema.columns.push_back({name, group, Encoding::binary_flag, "", ""});
    }
    void one_hot(const CategoricalField& cat, DatasetKind group) {
        for (const auto& level : cat.levels)
            schema.columns.push_back({cat.field + "=" + sanitize_name(level), group,
                                      Encoding::one_hot_level, cat.field, level});
    }
};

}  // namespace detail

// Column layout for one dataset kind, with one-hot levels fixed from the
// cases seen at fit time. Unseen levels later encode to all-zeros.
inline FeatureSchema fit_schema(const std::vector<AdmissionCase>& cases, DatasetKind kind) {
    if (cases.empty()) throw DataError("fit_schema: no cases");
    detail::GroupBuilder b;

    const bool want_all = kind == DatasetKind::combined;
    if (want_all || kind == DatasetKind::admission) {
        b.numeric("total_days", DatasetKind::admission);
        b.numeric("admission_month", DatasetKind::admission);
        b.one_hot(detail::observe_levels(cases, "discharge_location", detail::get_location),
                  DatasetKind::admission);
        b.flag("er_initial_ami", DatasetKind::admission);
    }
    if (want_all || kind == DatasetKind::demographics) {
        b.numeric("age", DatasetKind::demographics);
        b.one_hot(detail::observe_levels(cases, "gender", detail::get_gender), DatasetKind::demographics);
        b.one_hot(detail::observe_levels(cases, "religion", detail::get_religion),
                  DatasetKind::demographics);
        b.one_hot(detail::observe_levels(cases, "ethnicity", detail::get_ethnicity),
                  DatasetKind::demographics);
        b.one_hot(detail::observe_levels(cases, "marital_status", detail::get_marital),
                  DatasetKind::demographics);
    }
    if (want_all || kind == DatasetKind::treatment) {
        for (const auto& t : treatment_categories())
            b.flag("tx_" + detail::sanitize_name(t), DatasetKind::treatment);
    }
    if (want_all || kind == DatasetKind::diagnostic) {
        for (const auto& g : comorbidity_groups())
            b.flag("dx_" + detail::sanitize_name(g), DatasetKind::diagnostic);
    }
    if (want_all || kind == DatasetKind::lab_chart) {
        std::set<int> items;
        for (const auto& c : cases)
            for (const auto& [item, value] : c.event_means) items.insert(item);
        for (int item : items) {
            FeatureDesc d;
            d.name = "item_" + std::to_string(item);
            d.group = DatasetKind::lab_chart;
            d.encoding = Encoding::numeric;
            d.field = std::to_string(item);  // item id, for row encoding
            b.schema.columns.push_back(d);
        }
    }
    return b.schema;
}

// Same schema with item columns named from the dictionary.
inline FeatureSchema fit_schema(const std::vector<AdmissionCase>& cases, DatasetKind kind,
                                const std::vector<LabItemRow>& dictionary) {
    FeatureSchema schema = fit_schema(cases, kind);
    std::map<std::string, std::string> names;
    for (const auto& i : dictionary)
        names[std::to_string(i.item_id)] = detail::sanitize_name(i.label);
    std::set<std::string> used;
    for (auto& col : schema.columns) {
        if (col.group != DatasetKind::lab_chart) {
            used.insert(col.name);
            continue;
        }
        auto it = names.find(col.field);
        if (it != names.end() && !it->second.empty() && used.insert(it->second).second)
            col.name = it->second;
        else
            used.insert(col.name);
    }
    return schema;
}

// Indicator vector over the field's fitted levels: exactly one 1 for a seen
// level, all zeros for an unseen one.
inline std::vector<double> encode_categorical(const FeatureSchema& schema, const std::string& field,
                                              const std::string& value) {
    const auto idx = schema.field_columns(field);
    if (idx.empty())
        throw ContractError("encode_categorical: '" + field + "' is not a categorical field");
    std::vector<double> out(idx.size(), 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k)
        if (schema.columns[idx[k]].level == value) out[k] = 1.0;
    return out;
}

namespace detail {

inline void encode_case(const FeatureSchema& schema, const AdmissionCase& c, std::span<double> row,
                        std::uint8_t* missing) {
    for (std::size_t j = 0; j < schema.columns.size(); ++j) {
        const FeatureDesc& col = schema.columns[j];
        double v = 0.0;
        bool miss = false;
        switch (col.group) {
            case DatasetKind::admission:
                if (col.name == "total_days")
                    v = c.admission.total_days;
                else if (col.name == "admission_month")
                    v = static_cast<double>(c.admission.admission_month);
                else if (col.name == "er_initial_ami")
                    v = c.admission.er_initial_ami_flag ? 1.0 : 0.0;
                else
                    v = (c.admission.discharge_location == col.level) ? 1.0 : 0.0;
                break;
            case DatasetKind::demographics:
                if (col.name == "age") {
                    v = c.age_at_admission;
                } else if (col.field == "gender") {
                    v = (c.patient.gender == col.level) ? 1.0 : 0.0;
                } else if (col.field == "religion") {
                    v = (c.admission.religion == col.level) ? 1.0 : 0.0;
                } else if (col.field == "ethnicity") {
                    v = (c.admission.ethnicity == col.level) ? 1.0 : 0.0;
                } else {
                    v = (c.admission.marital_status == col.level) ? 1.0 : 0.0;
                }
                break;
            case DatasetKind::treatment: {
                bool has = false;
                for (const auto& t : c.treatments)
                    if ("tx_" + sanitize_name(t) == col.name) {
                        has = true;
                        break;
                    }
                v = has ? 1.0 : 0.0;
                break;
            }
            case DatasetKind::diagnostic: {
                bool has = false;
                for (const auto& g : c.comorbidity_groups)
                    if ("dx_" + sanitize_name(g) == col.name) {
                        has = true;
                        break;
                    }
                v = has ? 1.0 : 0.0;
                break;
            }
            case DatasetKind::lab_chart: {
                const int item = static_cast<int>(std::strtol(col.field.c_str(), nullptr, 10));
                auto it = c.event_means.find(item);
                if (it == c.event_means.end()) {
                    miss = true;
                } else {
                    v = it->second;
                }
                break;
            }
            case DatasetKind::combined:
                throw ContractError("combined is not a column group");
        }
        row[j] = v;
        missing[j] = miss ? 1 : 0;
    }
}

}  // namespace detail

// Numeric matrix for one of the six dataset kinds: Table 1's variables for
// the kind, categoricals one-hot, treatments and comorbidity groups as
// presence flags, lab/chart means as numeric columns with a missing mask.
inline FeatureMatrix build_dataset(const std::vector<AdmissionCase>& cases, DatasetKind kind,
                                   const std::vector<LabItemRow>& dictionary = {}) {
    if (cases.empty()) throw DataError("build_dataset: no cases");
    FeatureMatrix fm;
    fm.schema = dictionary.empty() ? fit_schema(cases, kind) : fit_schema(cases, kind, dictionary);
    const std::size_t n = cases.size(), p = fm.schema.size();
    fm.x = Matrix(n, p);
    fm.missing.assign(n * p, 0);
    fm.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        detail::encode_case(fm.schema, cases[i], fm.x.row(i), fm.missing.data() + i * p);
        fm.labels[i] = label_value(cases[i].label);
    }
    return fm;
}

// Train-fold statistics for imputation and (optionally) standardization.
// Missing cells impute to the train-fold column mean. When standardizing,
// non-constant columns scale to unit population sd; constant columns are
// centered only.
class Standardizer {
public:
    struct ColumnStats {
        double mean = 0.0;
        double sd = 0.0;  // population sd; 0 marks a constant column
    };

    static Standardizer fit(const FeatureMatrix& fm, const std::vector<std::size_t>& train_rows,
                            bool standardize) {
        Standardizer s;
        s.standardize_ = standardize;
        const std::size_t p = fm.cols();
        s.cols_.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t r : train_rows) {
                if (fm.is_missing(r, j)) continue;
                sum += fm.x.at(r, j);
                ++n;
            }
            const double mean = n ? sum / static_cast<double>(n) : 0.0;
            double ss = 0.0;
            for (std::size_t r : train_rows) {
                if (fm.is_missing(r, j)) continue;
                const double d = fm.x.at(r, j) - mean;
                ss += d * d;
            }
            const double var = n ? ss / static_cast<double>(n) : 0.0;
            s.cols_[j] = {mean, var > 0.0 ? std::sqrt(var) : 0.0};
        }
        return s;
    }

    double transform_value(std::size_t j, double value, bool missing) const {
        const ColumnStats& c = cols_[j];
        const double v = missing ? c.mean : value;
        if (!standardize_) return v;
        if (c.sd > 0.0) return (v - c.mean) / c.sd;
        return v - c.mean;
    }

    Matrix apply(const FeatureMatrix& fm, const std::vector<std::size_t>& rows) const {
        if (cols_.size() != fm.cols())
            throw ContractError("Standardizer: column count mismatch");
        Matrix out(rows.size(), fm.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::size_t r = rows[i];
            for (std::size_t j = 0; j < fm.cols(); ++j)
                out.at(i, j) = transform_value(j, fm.x.at(r, j), fm.is_missing(r, j));
        }
        return out;
    }

    void transform_row(std::span<const double> values, const std::uint8_t* missing,
                       std::span<double> out) const {
        for (std::size_t j = 0; j < cols_.size(); ++j)
            out[j] = transform_value(j, values[j], missing ? missing[j] != 0 : false);
    }

    const std::vector<ColumnStats>& columns() const { return cols_; }
    bool standardizes() const { return standardize_; }

    void save(std::ostream& out) const {
        out << "standardizer " << (standardize_ ? 1 : 0) << " " << cols_.size() << "\n";
        out.precision(17);
        for (const auto& c : cols_) out << c.mean << " " << c.sd << "\n";
    }
    static Standardizer load(std::istream& in) {
        std::string tag;
        int std_flag = 0;
        std::size_t n = 0;
        in >> tag >> std_flag >> n;
        if (tag != "standardizer") throw DataError("bad standardizer block");
        Standardizer s;
        s.standardize_ = std_flag != 0;
        s.cols_.resize(n);
        for (auto& c : s.cols_) in >> c.mean >> c.sd;
        if (!in) throw DataError("truncated standardizer block");
        return s;
    }

private:
    std::vector<ColumnStats> cols_;
    bool standardize_ = true;
};

inline std::vector<std::size_t> all_rows(const FeatureMatrix& fm) {
    std::vector<std::size_t> rows(fm.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

// Delimited export: header = schema names, final column = label; missing
// cells are empty fields.
inline void export_dataset(const FeatureMatrix& fm, const std::filesystem::path& path,
                           const std::string& hash = {}) {
    CsvWriter w(path);
    if (!hash.empty()) w.metadata("config_hash", hash);
    std::vector<std::string> header = fm.schema.names();
    header.push_back("label");
    w.row(header);
    char buf[40];
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        std::vector<std::string> fields;
        fields.reserve(fm.cols() + 1);
        for (std::size_t j = 0; j < fm.cols(); ++j) {
            if (fm.is_missing(i, j)) {
                fields.emplace_back();
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", fm.x.at(i, j));
                fields.emplace_back(buf);
            }
        }
        fields.push_back(std::to_string(fm.labels[i]));
        w.row(fields);
    }
    w.close();
}

inline FeatureMatrix import_dataset(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    if (t.header.empty() || t.header.back() != "label")
        throw DataError("dataset file missing final 'label' column: " + path.string());
    FeatureMatrix fm;
    const std::size_t p = t.header.size() - 1;
    for (std::size_t j = 0; j < p; ++j)
        fm.schema.columns.push_back({t.header[j], DatasetKind::combined, Encoding::numeric, "", ""});
    fm.x = Matrix(t.rows.size(), p);
    fm.missing.assign(t.rows.size() * p, 0);
    fm.labels.resize(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string ctx = path.filename().string() + ":" + std::to_string(t.line_numbers[i]);
        for (std::size_t j = 0; j < p; ++j) {
            const std::string& cell = t.rows[i][j];
            if (cell.empty()) {
                fm.missing[i * p + j] = 1;
            } else {
                fm.x.at(i, j) = parse_double(cell, ctx);
            }
        }
        const long long y = parse_int(t.rows[i][p], ctx);
        if (y != 0 && y != 1) throw DataError(ctx + ": label must be 0 or 1");
        fm.labels[i] = static_cast<int>(y);
    }
    return fm;
}

}  // namespace amipred
