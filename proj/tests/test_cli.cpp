#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amipred/learners.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

const fs::path kWork = fs::temp_directory_path() / "amipred_cli_tests";

RunResult run_cli(const std::string& args) {
    const fs::path log = kWork / "last_output.txt";
    const std::string cmd =
        std::string(AMIPRED_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kSynthArgs = "--n 300 --positive-rate 0.3 --seed 11 --signal lab_chart=2.0";

void ensure_tables() {
    static bool done = false;
    if (done) return;
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    const RunResult r = run_cli("synth --out " + (kWork / "tables").string() + " " + kSynthArgs);
    REQUIRE(r.exit_code == 0);
    done = true;
}

}  // namespace

TEST_CASE("synth writes the seven tables deterministically") {
    ensure_tables();
    for (const char* name : {"patients.csv", "admissions.csv", "diagnoses.csv", "drg_codes.csv",
                             "lab_events.csv", "chart_events.csv", "lab_items.csv"})
        CHECK(fs::exists(kWork / "tables" / name));

    const RunResult again =
        run_cli("synth --out " + (kWork / "tables2").string() + " " + kSynthArgs);
    REQUIRE(again.exit_code == 0);
    for (const char* name : {"patients.csv", "admissions.csv", "lab_events.csv"})
        CHECK(slurp(kWork / "tables" / name) == slurp(kWork / "tables2" / name));
}

TEST_CASE("ingest emits the cohort and cleaning report with a config hash") {
    ensure_tables();
    const RunResult r = run_cli("ingest --tables " + (kWork / "tables").string() + " --out " +
                                (kWork / "ingest").string() + " --export-dataset combined");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "ingest" / "cohort.csv"));
    CHECK(fs::exists(kWork / "ingest" / "cleaning_report.csv"));
    CHECK(fs::exists(kWork / "ingest" / "combined.csv"));
    CHECK(slurp(kWork / "ingest" / "cohort.csv").rfind("# config_hash: ", 0) == 0);
    CHECK(r.output.find("cohort: 300 cases, 90 positive") != std::string::npos);
}

TEST_CASE("stats reproduces the cohort positive count") {
    ensure_tables();
    const RunResult r = run_cli("stats --tables " + (kWork / "tables").string() + " --out " +
                                (kWork / "stats").string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "stats" / "summary_table.csv"));
    CHECK(r.output.find("Overall | Total | n=300 | pos=90 (30.0%)") != std::string::npos);
}

TEST_CASE("train writes a loadable model file") {
    ensure_tables();
    const fs::path model_path = kWork / "model.txt";
    const RunResult r =
        run_cli("train --tables " + (kWork / "tables").string() + " --dataset lab_chart " +
                "--learner logistic --seed 5 --out " + model_path.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(model_path);
    const auto model = amipred::load_model(in);
    REQUIRE(model != nullptr);
    CHECK(model->family() == amipred::LearnerFamily::logistic);
}

TEST_CASE("evaluate writes the report and roc artifacts") {
    ensure_tables();
    const RunResult r = run_cli(
        "evaluate --tables " + (kWork / "tables").string() + " --dataset lab_chart " +
        "--learner logistic --k 5 --seed 5 --workers 2 --roc-plot --out " +
        (kWork / "eval").string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "eval" / "eval_lab_chart_logistic.txt"));
    CHECK(fs::exists(kWork / "eval" / "roc_lab_chart_logistic.csv"));
    CHECK(fs::exists(kWork / "eval" / "roc_lab_chart_logistic.svg"));
    const std::string report = slurp(kWork / "eval" / "eval_lab_chart_logistic.txt");
    CHECK(report.find("accuracy: ") != std::string::npos);
    CHECK(report.find("auc: ") != std::string::npos);
    CHECK(report.find("fold 4:") != std::string::npos);
}

TEST_CASE("compare ranks learners by dataset and is reproducible") {
    ensure_tables();
    const std::string args = "compare --tables " + (kWork / "tables").string() +
                             " --k 4 --seed 9 --workers 2 --datasets lab_chart --datasets "
                             "treatment --learners logistic --learners stump --roc-plot --out ";
    const RunResult r = run_cli(args + (kWork / "cmp1").string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(kWork / "cmp1" / "compare_all.csv"));
    CHECK(fs::exists(kWork / "cmp1" / "table3_best_by_dataset.csv"));
    CHECK(fs::exists(kWork / "cmp1" / "roc_overlay.svg"));
    const std::string csv = slurp(kWork / "cmp1" / "compare_all.csv");
    CHECK(csv.find("dataset,learner,accuracy_pct,auc,precision,recall,f_measure") !=
          std::string::npos);
    CHECK(csv.find("lab_chart,logistic,") != std::string::npos);
    CHECK(csv.find("treatment,stump,") != std::string::npos);

    const RunResult again = run_cli(args + (kWork / "cmp2").string());
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(kWork / "cmp1" / "compare_all.csv") == slurp(kWork / "cmp2" / "compare_all.csv"));
}

TEST_CASE("exit codes follow the documented classes") {
    ensure_tables();
    SECTION("unknown subcommand exits 2 with usage text") {
        const RunResult r = run_cli("frobnicate");
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("Usage") != std::string::npos);
    }
    SECTION("unknown learner exits 2") {
        const RunResult r = run_cli("evaluate --tables " + (kWork / "tables").string() +
                                    " --dataset lab_chart --learner nope --seed 1 --out " +
                                    (kWork / "x").string());
        CHECK(r.exit_code == 2);
    }
    SECTION("missing tables exit 3") {
        const RunResult r = run_cli("stats --tables /nonexistent --out " + (kWork / "x").string());
        CHECK(r.exit_code == 3);
    }
    SECTION("help exits 0") {
        CHECK(run_cli("--help").exit_code == 0);
        CHECK(run_cli("synth --help").exit_code == 0);
    }
}
