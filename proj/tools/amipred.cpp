// Command-line driver for the one-year mortality pipeline: synthetic table
// generation, ingestion, cohort statistics, model training, cross-validated
// evaluation, and the learner-by-dataset comparison report.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "amipred/cohortstats.hpp"
#include "amipred/evaluate.hpp"
#include "amipred/features.hpp"
#include "amipred/ingest.hpp"
#include "amipred/learners.hpp"
#include "amipred/preprocess.hpp"
#include "amipred/report.hpp"
#include "amipred/synthgen.hpp"

namespace fs = std::filesystem;
using namespace amipred;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

fs::path default_out_dir() {
    const char* env = std::getenv("AMIPRED_OUT");
    return env && *env ? fs::path(env) : fs::path(".");
}

struct CommonTableArgs {
    std::string tables;
    std::string ranges_file;
    bool remove_outliers = false;
};

void add_table_args(CLI::App* cmd, CommonTableArgs& args) {
    cmd->add_option("--tables", args.tables, "Directory holding the seven input tables")
        ->required();
    cmd->add_option("--ranges", args.ranges_file,
                    "Plausibility ranges file (default: built-in conservative bounds)");
    cmd->add_flag("--remove-outliers", args.remove_outliers,
                  "Drop lab values outside the per-item Tukey fences");
}

CleanConfig make_clean_config(const CommonTableArgs& args) {
    CleanConfig config;
    config.ranges = args.ranges_file.empty() ? default_plausibility_ranges()
                                             : read_plausibility_ranges(args.ranges_file);
    config.remove_outliers = args.remove_outliers;
    return config;
}

std::string run_hash(const std::string& canonical) { return config_hash(canonical); }

Cohort load_and_build(const CommonTableArgs& args) {
    const RawTables tables = load_tables(TablePaths::in_dir(args.tables));
    std::cerr << "loaded tables: patients=" << tables.patients.size()
              << " admissions=" << tables.admissions.size()
              << " diagnoses=" << tables.diagnoses.size() << " drg=" << tables.drg_codes.size()
              << " lab_events=" << tables.lab_events.size()
              << " chart_events=" << tables.chart_events.size()
              << " lab_items=" << tables.lab_items.size() << "\n";
    return build_cohort(tables, make_clean_config(args));
}

void apply_hp(LearnerSpec& spec, const std::vector<std::string>& hp) {
    for (const auto& kv : hp) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--hp expects key=value, got '" + kv + "'");
        spec.hyperparameters[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1), "--hp " + kv);
    }
}

int cmd_synth(const SynthConfig& config, const fs::path& out) {
    const SynthResult result = generate(config, out);
    long long positives = 0;
    for (int y : result.planted_labels) positives += y;
    std::cout << "wrote synthetic tables to " << out.string() << "\n"
              << "ami_admissions: " << result.planted_labels.size() << "\n"
              << "positives: " << positives << "\n"
              << "patients: " << result.tables.patients.size() << "\n"
              << "config_hash: " << run_hash(config.canonical()) << "\n";
    return kExitOk;
}

int cmd_ingest(const CommonTableArgs& args, const fs::path& out,
               const std::vector<std::string>& export_kinds) {
    fs::create_directories(out);
    const Cohort cohort = load_and_build(args);
    const std::string hash =
        run_hash("ingest\ntables=" + args.tables + "\nranges=" + args.ranges_file +
                 "\nremove_outliers=" + (args.remove_outliers ? "1" : "0") + "\n");
    write_cohort_csv(out / "cohort.csv", cohort.cases, hash);
    write_clean_report(out / "cleaning_report.csv", cohort.report, hash);
    long long positives = 0;
    for (const auto& c : cohort.cases) positives += label_value(c.label);
    std::cout << "cohort: " << cohort.cases.size() << " cases, " << positives << " positive\n";
    for (const auto& [rule, count] : cohort.report.rows())
        std::cout << "  " << rule << ": " << count << "\n";

    if (!export_kinds.empty()) {
        const RawTables tables = load_tables(TablePaths::in_dir(args.tables));
        for (const auto& kind_name : export_kinds) {
            const DatasetKind kind = dataset_kind_from_string(kind_name);
            const FeatureMatrix fm = build_dataset(cohort.cases, kind, tables.lab_items);
            export_dataset(fm, out / (kind_name + ".csv"), hash);
            std::cout << "exported " << kind_name << ": " << fm.rows() << " x " << fm.cols()
                      << "\n";
        }
    }
    return kExitOk;
}

int cmd_stats(const CommonTableArgs& args, const fs::path& out) {
    fs::create_directories(out);
    const Cohort cohort = load_and_build(args);
    const std::vector<SummaryRow> rows = summary_table(cohort.cases);
    const std::string hash = run_hash("stats\ntables=" + args.tables + "\n");
    write_summary_table(out / "summary_table.csv", rows, hash);
    for (const auto& r : rows) {
        std::cout << r.characteristic << " | " << r.subgroup << " | n=" << r.n << " | pos="
                  << r.positives << " (" << format_fixed(r.positive_pct, 1) << "%) | neg="
                  << r.negatives << " (" << format_fixed(r.negative_pct, 1) << "%)";
        if (r.chi_square.defined)
            std::cout << " | p=" << format_p_value(r.chi_square.p_value);
        std::cout << "\n";
    }
    return kExitOk;
}

struct LearnerArgs {
    std::string dataset;
    std::string learner;
    std::vector<std::string> hp;
    std::uint64_t seed = 0;
};

FeatureMatrix build_for(const CommonTableArgs& args, const std::string& dataset_name,
                        const Cohort& cohort) {
    const RawTables tables = load_tables(TablePaths::in_dir(args.tables));
    return build_dataset(cohort.cases, dataset_kind_from_string(dataset_name), tables.lab_items);
}

int cmd_train(const CommonTableArgs& args, const LearnerArgs& largs, const fs::path& out_file) {
    const Cohort cohort = load_and_build(args);
    const FeatureMatrix fm = build_for(args, largs.dataset, cohort);

    LearnerSpec spec;
    spec.family = learner_family_from_string(largs.learner);
    spec.seed = largs.seed;
    apply_hp(spec, largs.hp);

    const Standardizer st =
        Standardizer::fit(fm, all_rows(fm), wants_standardized_inputs(spec.family));
    const Matrix x = st.apply(fm, all_rows(fm));
    std::vector<Encoding> encodings;
    for (const auto& col : fm.schema.columns) encodings.push_back(col.encoding);
    const std::unique_ptr<Model> model = train(spec, x, fm.labels, encodings);

    std::ofstream out(out_file);
    if (!out) throw DataError("cannot write model file: " + out_file.string());
    const std::string hash = run_hash("train\ndataset=" + largs.dataset +
                                      "\nlearner=" + largs.learner +
                                      "\nseed=" + std::to_string(largs.seed) + "\n");
    save_model(*model, out, hash);
    st.save(out);
    std::cout << "trained " << largs.learner << " on " << largs.dataset << " (" << fm.rows()
              << " x " << fm.cols() << "), model written to " << out_file.string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const CommonTableArgs& args, const LearnerArgs& largs, std::size_t k,
                 std::size_t workers, bool roc_plot, const fs::path& out) {
    fs::create_directories(out);
    const Cohort cohort = load_and_build(args);
    const FeatureMatrix fm = build_for(args, largs.dataset, cohort);

    LearnerSpec spec;
    spec.family = learner_family_from_string(largs.learner);
    spec.seed = largs.seed;
    apply_hp(spec, largs.hp);

    const EvalReport report = cross_validate(spec, fm, k, largs.seed, workers);
    const std::string hash =
        run_hash("evaluate\ndataset=" + largs.dataset + "\nlearner=" + largs.learner +
                 "\nk=" + std::to_string(k) + "\nseed=" + std::to_string(largs.seed) + "\n");
    const std::string stem = largs.dataset + "_" + largs.learner;
    write_eval_report(out / ("eval_" + stem + ".txt"), report, largs.dataset, largs.learner, k,
                      largs.seed, hash);
    write_roc_csv(out / ("roc_" + stem + ".csv"), report.roc, hash);
    if (roc_plot)
        write_roc_svg(out / ("roc_" + stem + ".svg"), {{stem, report.roc}},
                      "ROC: " + largs.dataset + " / " + largs.learner);
    std::cout << largs.dataset << " / " << largs.learner << ": accuracy "
              << format_fixed(100.0 * report.pooled.accuracy, 2) << "%, AUC "
              << format_fixed(report.auc, 3) << "\n";
    return kExitOk;
}

int cmd_compare(const CommonTableArgs& args, std::size_t k, std::uint64_t seed,
                std::size_t workers, const std::vector<std::string>& dataset_names,
                const std::vector<std::string>& learner_names, bool roc_plot,
                const fs::path& out) {
    fs::create_directories(out);
    const Cohort cohort = load_and_build(args);
    const RawTables tables = load_tables(TablePaths::in_dir(args.tables));

    std::vector<std::string> datasets = dataset_names;
    if (datasets.empty())
        for (DatasetKind kind : all_dataset_kinds()) datasets.push_back(to_string(kind));
    std::vector<std::string> learners = learner_names;
    if (learners.empty())
        for (LearnerFamily f : all_learner_families()) learners.push_back(to_string(f));

    std::vector<FeatureMatrix> matrices;
    matrices.reserve(datasets.size());
    for (const auto& name : datasets)
        matrices.push_back(
            build_dataset(cohort.cases, dataset_kind_from_string(name), tables.lab_items));

    struct Job {
        std::size_t dataset_idx;
        std::string learner;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (const auto& l : learners) jobs.push_back({d, l});

    struct JobResult {
        CompareRow row;
        std::vector<ROCPoint> roc;
        std::string error;
    };
    std::vector<JobResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    const std::size_t n_workers = std::max<std::size_t>(1, workers);
    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            JobResult& r = results[i];
            r.row.dataset = datasets[jobs[i].dataset_idx];
            r.row.learner = jobs[i].learner;
            try {
                LearnerSpec spec;
                spec.family = learner_family_from_string(jobs[i].learner);
                spec.seed = seed;
                const EvalReport report =
                    cross_validate(spec, matrices[jobs[i].dataset_idx], k, seed, 1);
                r.row.metrics = report.pooled;
                r.row.auc = report.auc;
                r.roc = report.roc;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w + 1 < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<CompareRow> rows;
    for (const auto& r : results) {
        if (!r.error.empty())
            throw DataError("compare " + r.row.dataset + "/" + r.row.learner + ": " + r.error);
        rows.push_back(r.row);
    }

    std::ostringstream canon;
    canon << "compare\nk=" << k << "\nseed=" << seed;
    for (const auto& d : datasets) canon << "\ndataset=" << d;
    for (const auto& l : learners) canon << "\nlearner=" << l;
    const std::string hash = run_hash(canon.str());

    write_compare_csv(out / "compare_all.csv", rows, hash);
    const std::vector<CompareRow> best = best_by_dataset(rows);
    write_compare_csv(out / "table3_best_by_dataset.csv", best, hash);
    std::vector<CompareRow> combined_rows;
    for (const auto& r : rows)
        if (r.dataset == "combined") combined_rows.push_back(r);
    if (!combined_rows.empty())
        write_compare_csv(out / "table4_combined.csv", combined_rows, hash);

    if (roc_plot) {
        std::vector<RocSeries> series;
        for (const auto& b : best)
            for (std::size_t i = 0; i < results.size(); ++i)
                if (results[i].row.dataset == b.dataset && results[i].row.learner == b.learner)
                    series.push_back({b.dataset + " (" + b.learner + ")", results[i].roc});
        write_roc_svg(out / "roc_overlay.svg", series, "ROC of best model per dataset");
    }

    std::cout << "dataset,learner,accuracy_pct,auc,precision,recall,f_measure\n";
    for (const auto& r : rows)
        std::cout << r.dataset << "," << r.learner << "," << format_fixed(100.0 * r.metrics.accuracy, 2)
                  << "," << format_fixed(r.auc, 3) << "," << format_fixed(r.metrics.precision, 3)
                  << "," << format_fixed(r.metrics.recall, 3) << ","
                  << format_fixed(r.metrics.f_measure, 3) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-year AMI mortality prediction pipeline"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a synthetic seven-table cohort");
    SynthConfig synth_config;
    std::string synth_out = (default_out_dir() / "synth").string();
    std::string synth_config_file;
    std::vector<std::string> signal_args;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--config", synth_config_file, "Synth config file (key=value lines)");
    synth->add_option("--n", synth_config.n_admissions, "Number of AMI admissions");
    synth->add_option("--positive-rate", synth_config.positive_rate, "Exact positive fraction");
    synth->add_option("--seed", synth_config.seed, "RNG seed");
    synth->add_option("--masked-age-fraction", synth_config.masked_age_fraction,
                      "Fraction of patients with masked ages");
    synth->add_option("--missingness", synth_config.missingness_rate,
                      "Per (admission, item) missing probability");
    synth->add_option("--signal", signal_args,
                      "group=strength (admission, demographics, treatment, diagnostic, lab_chart)");

    // --- ingest ---
    auto* ingest = app.add_subcommand("ingest", "Build the cohort and the cleaning report");
    CommonTableArgs ingest_args;
    std::string ingest_out = (default_out_dir() / "ingest").string();
    std::vector<std::string> export_kinds;
    add_table_args(ingest, ingest_args);
    ingest->add_option("--out", ingest_out, "Output directory");
    ingest->add_option("--export-dataset", export_kinds, "Also export a feature dataset CSV");

    // --- stats ---
    auto* stats = app.add_subcommand("stats", "Cohort summary statistics with chi-square tests");
    CommonTableArgs stats_args;
    std::string stats_out = (default_out_dir() / "stats").string();
    add_table_args(stats, stats_args);
    stats->add_option("--out", stats_out, "Output directory");

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "Train one model and serialize it");
    CommonTableArgs train_args;
    LearnerArgs train_largs;
    std::string train_out = (default_out_dir() / "model.txt").string();
    add_table_args(train_cmd, train_args);
    train_cmd->add_option("--dataset", train_largs.dataset, "Dataset kind")->required();
    train_cmd->add_option("--learner", train_largs.learner, "Learner family")->required();
    train_cmd->add_option("--hp", train_largs.hp, "Hyperparameter key=value");
    train_cmd->add_option("--seed", train_largs.seed, "RNG seed")->required();
    train_cmd->add_option("--out", train_out, "Model file path");

    // --- evaluate ---
    auto* eval_cmd = app.add_subcommand("evaluate", "Cross-validated evaluation of one model");
    CommonTableArgs eval_args;
    LearnerArgs eval_largs;
    std::size_t eval_k = 10, eval_workers = 1;
    bool eval_roc_plot = false;
    std::string eval_out = (default_out_dir() / "evaluate").string();
    add_table_args(eval_cmd, eval_args);
    eval_cmd->add_option("--dataset", eval_largs.dataset, "Dataset kind")->required();
    eval_cmd->add_option("--learner", eval_largs.learner, "Learner family")->required();
    eval_cmd->add_option("--hp", eval_largs.hp, "Hyperparameter key=value");
    eval_cmd->add_option("--k", eval_k, "Fold count");
    eval_cmd->add_option("--seed", eval_largs.seed, "RNG seed")->required();
    eval_cmd->add_option("--workers", eval_workers, "Parallel fold workers");
    eval_cmd->add_flag("--roc-plot", eval_roc_plot, "Also write an SVG ROC plot");
    eval_cmd->add_option("--out", eval_out, "Output directory");

    // --- compare ---
    auto* compare = app.add_subcommand("compare", "Rank learners across datasets");
    CommonTableArgs compare_args;
    std::size_t compare_k = 10, compare_workers = std::thread::hardware_concurrency();
    std::uint64_t compare_seed = 0;
    bool compare_roc_plot = false;
    std::vector<std::string> compare_datasets, compare_learners;
    std::string compare_out = (default_out_dir() / "compare").string();
    add_table_args(compare, compare_args);
    compare->add_option("--k", compare_k, "Fold count");
    compare->add_option("--seed", compare_seed, "RNG seed")->required();
    compare->add_option("--workers", compare_workers, "Concurrent (dataset, learner) jobs");
    compare->add_option("--datasets", compare_datasets, "Subset of dataset kinds");
    compare->add_option("--learners", compare_learners, "Subset of learner families");
    compare->add_flag("--roc-plot", compare_roc_plot, "Write the overlay SVG (Figure 1 analogue)");
    compare->add_option("--out", compare_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth->parsed()) {
            if (!synth_config_file.empty()) {
                // command-line values override file values only when given
                SynthConfig merged = read_synth_config(synth_config_file);
                if (synth->count("--n")) merged.n_admissions = synth_config.n_admissions;
                if (synth->count("--positive-rate")) merged.positive_rate = synth_config.positive_rate;
                if (synth->count("--seed")) merged.seed = synth_config.seed;
                if (synth->count("--masked-age-fraction"))
                    merged.masked_age_fraction = synth_config.masked_age_fraction;
                if (synth->count("--missingness"))
                    merged.missingness_rate = synth_config.missingness_rate;
                synth_config = merged;
            }
            for (const auto& s : signal_args) {
                const auto eq = s.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--signal expects group=strength, got '" + s + "'");
                const std::string group = s.substr(0, eq);
                const double value = parse_double(s.substr(eq + 1), "--signal " + s);
                if (group == "admission")
                    synth_config.signal_admission = value;
                else if (group == "demographics")
                    synth_config.signal_demographics = value;
                else if (group == "treatment")
                    synth_config.signal_treatment = value;
                else if (group == "diagnostic")
                    synth_config.signal_diagnostic = value;
                else if (group == "lab_chart")
                    synth_config.signal_lab_chart = value;
                else
                    throw ConfigError("--signal: unknown group '" + group + "'");
            }
            return cmd_synth(synth_config, synth_out);
        }
        if (ingest->parsed()) return cmd_ingest(ingest_args, ingest_out, export_kinds);
        if (stats->parsed()) return cmd_stats(stats_args, stats_out);
        if (train_cmd->parsed()) return cmd_train(train_args, train_largs, train_out);
        if (eval_cmd->parsed())
            return cmd_evaluate(eval_args, eval_largs, eval_k, eval_workers, eval_roc_plot, eval_out);
        if (compare->parsed())
            return cmd_compare(compare_args, compare_k, compare_seed, compare_workers,
                               compare_datasets, compare_learners, compare_roc_plot, compare_out);
        std::cerr << "error: no subcommand\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
