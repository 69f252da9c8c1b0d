// End-to-end tests of the command-line tool: each case invokes the installed
// binary (path injected via RPMS_CLI_PATH) in a scratch directory and checks
// exit status, stderr wording, and the produced files.

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "rpms/data_io.hpp"
#include "rpms/evaluation.hpp"
#include "rpms/summaries.hpp"
#include "rpms/trace_io.hpp"

#include "test_support.hpp"

using namespace rpms;

namespace {

struct CommandResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CommandResult run_cli(const std::string& args, const testsupport::TempDir& dir,
                      const std::string& tag) {
    const std::string out_path = dir.file(tag + ".stdout");
    const std::string err_path = dir.file(tag + ".stderr");
    const std::string cmd = std::string(RPMS_CLI_PATH) + " " + args + " > " +
                            out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    CommandResult r;
    r.status = raw == -1 ? -1 : (WIFEXITED(raw) ? WEXITSTATUS(raw) : -2);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::vector<std::string> file_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

// Small two-cluster dataset used by most fixtures.
GeneratorSpec fixture_spec() {
    GeneratorSpec spec;
    spec.n = 24;
    spec.n_covariates = 2;
    spec.k_true = 2;
    spec.cluster_weights = {0.5, 0.5};
    spec.zeta_true = {0.9, 0.1, 0.1, 0.9};
    spec.beta_true = {2.0, 0.0, 0.0, -2.0};
    spec.lambda_true = 4.0;
    spec.seed = 3;
    return spec;
}

std::string write_fixture_data(const testsupport::TempDir& dir) {
    const std::string path = dir.file("data.csv");
    write_dataset(generate_synthetic(fixture_spec()).data, path);
    return path;
}

// Runs a short fit and returns the trace path.
std::string fixture_fit(const testsupport::TempDir& dir,
                        const std::string& data_path, std::uint64_t seed,
                        const std::string& extra = "") {
    const std::string out_dir = dir.file("fit" + std::to_string(seed));
    const CommandResult r = run_cli(
        "fit --data " + data_path + " --out " + out_dir +
            " --iterations 200 --burn-in 50 --seed " + std::to_string(seed) +
            " " + extra,
        dir, "fit" + std::to_string(seed));
    REQUIRE_MESSAGE(r.status == 0, "fit failed: " << r.err);
    return out_dir + "/fit_trace.jsonl";
}

} // namespace

TEST_CASE("cli requires a subcommand and offers help") {
    testsupport::TempDir dir;
    CHECK(run_cli("", dir, "bare").status != 0);
    const CommandResult help = run_cli("--help", dir, "help");
    CHECK(help.status == 0);
    CHECK(help.out.find("simulate") != std::string::npos);
    CHECK(help.out.find("fit") != std::string::npos);
    CHECK(help.out.find("diagnose") != std::string::npos);
}

TEST_CASE("simulate presets are deterministic and write optional labels") {
    testsupport::TempDir dir;
    const std::string base = "simulate --preset contrast --n 40 --seed 9";
    const CommandResult a =
        run_cli(base + " --out " + dir.file("a.csv") + " --labels-out " +
                    dir.file("la.csv"),
                dir, "sim_a");
    REQUIRE_MESSAGE(a.status == 0, a.err);
    const CommandResult b =
        run_cli(base + " --out " + dir.file("b.csv") + " --labels-out " +
                    dir.file("lb.csv"),
                dir, "sim_b");
    REQUIRE(b.status == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
    CHECK(slurp(dir.file("la.csv")) == slurp(dir.file("lb.csv")));

    const Dataset data = load_dataset(dir.file("a.csv"), "y");
    CHECK(data.n() == 40);
    CHECK(data.n_covariates == 6);

    const std::vector<std::string> labels = file_lines(dir.file("la.csv"));
    REQUIRE(labels.size() == 41);
    CHECK(labels[0] == "observation,cluster");
    for (std::size_t i = 1; i < labels.size(); ++i) {
        const std::vector<std::string> f = fields(labels[i]);
        REQUIRE(f.size() == 2);
        CHECK(f[0] == std::to_string(i));
        const int cluster = std::stoi(f[1]);
        CHECK(cluster >= 1);
        CHECK(cluster <= 2);
    }

    // a different seed must change the data
    const CommandResult c = run_cli(
        "simulate --preset contrast --n 40 --seed 10 --out " +
            dir.file("c.csv"),
        dir, "sim_c");
    REQUIRE(c.status == 0);
    CHECK(slurp(dir.file("a.csv")) != slurp(dir.file("c.csv")));
}

TEST_CASE("simulate mimic preset has no labels and matches the library") {
    testsupport::TempDir dir;
    const CommandResult ok = run_cli(
        "simulate --preset mimic --n 25 --seed 4 --out " + dir.file("m.csv"),
        dir, "mimic");
    REQUIRE_MESSAGE(ok.status == 0, ok.err);
    const Dataset data = load_dataset(dir.file("m.csv"), "y");
    CHECK(data.n() == 25);
    CHECK(data.n_covariates == 34);

    const Dataset direct = generate_luts_mimic(25, 4);
    CHECK(data.y == direct.y);
    CHECK(data.x == direct.x);

    const CommandResult bad = run_cli(
        "simulate --preset mimic --n 25 --seed 4 --out " + dir.file("n.csv") +
            " --labels-out " + dir.file("ln.csv"),
        dir, "mimic_labels");
    CHECK(bad.status == 1);
    CHECK(bad.err.find("no true labels") != std::string::npos);
}

TEST_CASE("simulate rejects ambiguous or unknown sources") {
    testsupport::TempDir dir;
    CHECK(run_cli("simulate --out " + dir.file("x.csv"), dir, "none").status ==
          1);
    const CommandResult both = run_cli(
        "simulate --preset recovery --spec nosuch.json --out " +
            dir.file("x.csv"),
        dir, "both");
    CHECK(both.status == 1);
    CHECK(both.err.find("exactly one of") != std::string::npos);
    const CommandResult unknown = run_cli(
        "simulate --preset nonsense --out " + dir.file("x.csv"), dir,
        "unknown");
    CHECK(unknown.status == 1);
    CHECK(unknown.err.find("unknown preset") != std::string::npos);
}

TEST_CASE("simulate honors a JSON generator spec") {
    testsupport::TempDir dir;
    const std::string spec_path = dir.file("spec.json");
    {
        std::ofstream out(spec_path);
        out << R"({"n": 30, "n_covariates": 2, "k_true": 2,
                   "cluster_weights": [0.5, 0.5],
                   "zeta_true": [[0.9, 0.1], [0.1, 0.9]],
                   "beta_true": [[1.5, 0.0], [0.0, -1.5]],
                   "lambda_true": 4.0, "seed": 11})";
    }
    const CommandResult r = run_cli(
        "simulate --spec " + spec_path + " --out " + dir.file("s.csv"), dir,
        "spec");
    REQUIRE_MESSAGE(r.status == 0, r.err);

    GeneratorSpec spec;
    spec.n = 30;
    spec.n_covariates = 2;
    spec.k_true = 2;
    spec.cluster_weights = {0.5, 0.5};
    spec.zeta_true = {0.9, 0.1, 0.1, 0.9};
    spec.beta_true = {1.5, 0.0, 0.0, -1.5};
    spec.lambda_true = 4.0;
    spec.seed = 11;
    const Dataset direct = generate_synthetic(spec).data;
    const Dataset loaded = load_dataset(dir.file("s.csv"), "y");
    CHECK(loaded.y == direct.y);
    CHECK(loaded.x == direct.x);

    // broken spec: missing field
    const std::string broken = dir.file("broken.json");
    {
        std::ofstream out(broken);
        out << R"({"n": 30})";
    }
    const CommandResult bad = run_cli(
        "simulate --spec " + broken + " --out " + dir.file("t.csv"), dir,
        "broken_spec");
    CHECK(bad.status == 1);
    CHECK(bad.err.find("broken.json") != std::string::npos);
}

TEST_CASE("fit writes a deterministic trace with matching manifest") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string args = "fit --data " + data_path +
                             " --iterations 40 --burn-in 10 --thin 3 "
                             "--seed 5 --prefix run --out ";
    const CommandResult r1 = run_cli(args + dir.file("o1"), dir, "fit1");
    REQUIRE_MESSAGE(r1.status == 0, r1.err);
    CHECK(r1.out.find("run_trace.jsonl") != std::string::npos);
    CHECK(r1.out.find("run_manifest.json") != std::string::npos);

    const std::string trace_path = dir.file("o1") + "/run_trace.jsonl";
    const Trace trace = read_trace(trace_path);
    CHECK(trace.samples.size() == 10); // floor((40 - 10) / 3)
    CHECK(trace.config.seed == 5);
    CHECK(trace.config.iterations == 40);

    const RunManifest manifest =
        read_manifest(dir.file("o1") + "/run_manifest.json");
    CHECK(manifest.config.iterations == 40);
    CHECK(manifest.config.seed == 5);
    CHECK(manifest.snapshots == 10);
    CHECK(manifest.dataset_hash == trace.dataset_hash);
    CHECK(manifest.dataset_path == data_path);
    CHECK(manifest.response_column == "y");
    CHECK(manifest.trace_path == trace_path);
    CHECK(manifest.wall_seconds >= 0.0);

    // the same invocation reproduces the trace byte for byte
    const CommandResult r2 = run_cli(args + dir.file("o2"), dir, "fit2");
    REQUIRE(r2.status == 0);
    CHECK(slurp(trace_path) == slurp(dir.file("o2") + "/run_trace.jsonl"));

    // a different seed changes it
    const CommandResult r3 = run_cli(
        "fit --data " + data_path +
            " --iterations 40 --burn-in 10 --thin 3 --seed 6 --prefix run "
            "--out " +
            dir.file("o3"),
        dir, "fit3");
    REQUIRE(r3.status == 0);
    CHECK(slurp(trace_path) != slurp(dir.file("o3") + "/run_trace.jsonl"));
}

TEST_CASE("fit runs one chain per seed and supports the response-only mode") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const CommandResult r = run_cli(
        "fit --data " + data_path +
            " --iterations 30 --burn-in 5 --seed 2,3 --out " + dir.file("om"),
        dir, "multiseed");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const Trace t2 = read_trace(dir.file("om") + "/fit_seed2_trace.jsonl");
    const Trace t3 = read_trace(dir.file("om") + "/fit_seed3_trace.jsonl");
    CHECK(t2.config.seed == 2);
    CHECK(t3.config.seed == 3);
    CHECK(file_exists(dir.file("om") + "/fit_seed2_manifest.json"));
    CHECK(file_exists(dir.file("om") + "/fit_seed3_manifest.json"));

    const CommandResult s = run_cli(
        "fit --data " + data_path +
            " --iterations 30 --burn-in 5 --mode ssp --out " + dir.file("os"),
        dir, "ssp");
    REQUIRE_MESSAGE(s.status == 0, s.err);
    const Trace ssp_trace = read_trace(dir.file("os") + "/fit_trace.jsonl");
    CHECK(ssp_trace.mode() == Mode::ssp);
    REQUIRE(!ssp_trace.samples.empty());
    for (const ClusterParams& cluster : ssp_trace.samples[0].clusters)
        CHECK(cluster.zeta.empty());

    const CommandResult bad_mode = run_cli(
        "fit --data " + data_path + " --mode nonsense --out " + dir.file("ox"),
        dir, "bad_mode");
    CHECK(bad_mode.status == 1);
}

TEST_CASE("fit reads key=value config files with command-line precedence") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string cfg = dir.file("run.cfg");
    {
        std::ofstream out(cfg);
        out << "iterations=50\n"
               "burn-in=5\n"
               "seed=7\n"
               "# trailing comment line\n"
               "\n"
               "thin=2   # inline comment\n";
    }
    const CommandResult r = run_cli(
        "fit --data " + data_path + " --config " + cfg +
            " --iterations 60 --out " + dir.file("oc"),
        dir, "config");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const RunManifest manifest =
        read_manifest(dir.file("oc") + "/fit_manifest.json");
    CHECK(manifest.config.iterations == 60); // command line wins
    CHECK(manifest.config.burn_in == 5);
    CHECK(manifest.config.thinning == 2);
    CHECK(manifest.config.seed == 7);

    const std::string bad_key = dir.file("bad_key.cfg");
    {
        std::ofstream out(bad_key);
        out << "wibble=1\n";
    }
    const CommandResult unknown = run_cli(
        "fit --data " + data_path + " --config " + bad_key + " --out " +
            dir.file("ou"),
        dir, "bad_key");
    CHECK(unknown.status == 1);
    CHECK(unknown.err.find("unknown configuration key 'wibble'") !=
          std::string::npos);

    const std::string no_eq = dir.file("no_eq.cfg");
    {
        std::ofstream out(no_eq);
        out << "iterations\n";
    }
    const CommandResult malformed = run_cli(
        "fit --data " + data_path + " --config " + no_eq + " --out " +
            dir.file("oe"),
        dir, "no_eq");
    CHECK(malformed.status == 1);
    CHECK(malformed.err.find("expected key=value") != std::string::npos);

    const std::string bad_value = dir.file("bad_value.cfg");
    {
        std::ofstream out(bad_value);
        out << "iterations=abc\n";
    }
    const CommandResult not_number = run_cli(
        "fit --data " + data_path + " --config " + bad_value + " --out " +
            dir.file("ov"),
        dir, "bad_value");
    CHECK(not_number.status == 1);
    CHECK(not_number.err.find("not a nonnegative integer") !=
          std::string::npos);
}

TEST_CASE("fit reports dataset problems through exit status and stderr") {
    testsupport::TempDir dir;
    const CommandResult missing = run_cli(
        "fit --data " + dir.file("nope.csv") + " --out " + dir.file("o"), dir,
        "missing");
    CHECK(missing.status == 1);
    CHECK(missing.err.find("cannot open dataset file") != std::string::npos);
}

TEST_CASE("summarize writes the full table set consistent with the library") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string trace_path = fixture_fit(dir, data_path, 5);
    const std::string out_dir = dir.file("sum");
    const CommandResult r = run_cli(
        "summarize --trace " + trace_path + " --data " + data_path +
            " --out " + out_dir,
        dir, "summarize");
    REQUIRE_MESSAGE(r.status == 0, r.err);

    const Trace trace = read_trace(trace_path);
    const Dataset data = load_dataset(data_path, "y");
    const Partition part = binder_partition(trace, coclustering(trace));
    const std::size_t n = data.n();
    const std::size_t d = data.n_covariates;

    const std::vector<std::string> k_rows =
        file_lines(out_dir + "/k_posterior.csv");
    REQUIRE(k_rows.size() >= 2);
    CHECK(k_rows[0] == "k,probability");
    double total = 0.0;
    for (std::size_t i = 1; i < k_rows.size(); ++i) {
        const std::vector<std::string> f = fields(k_rows[i]);
        REQUIRE(f.size() == 2);
        CHECK(std::stoul(f[0]) >= 1);
        total += std::stod(f[1]);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<std::string> cocluster_rows =
        file_lines(out_dir + "/coclustering.csv");
    CHECK(cocluster_rows.size() == 1 + n * (n - 1) / 2);
    CHECK(cocluster_rows[0] == "i,j,gamma");

    const std::vector<std::string> binder_rows =
        file_lines(out_dir + "/binder.csv");
    REQUIRE(binder_rows.size() == 1 + n);
    CHECK(binder_rows[0] == "observation,cluster");
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<std::string> f = fields(binder_rows[i + 1]);
        REQUIRE(f.size() == 2);
        CHECK(f[0] == std::to_string(i + 1));
        CHECK(std::stoi(f[1]) == part.labels[i] + 1);
    }

    const std::vector<std::string> profile_rows =
        file_lines(out_dir + "/cluster_profiles.csv");
    CHECK(profile_rows.size() == 1 + part.n_blocks * d);
    CHECK(profile_rows[0] == "cluster,size,coordinate,covariate_rate");

    const std::vector<std::string> inclusion_rows =
        file_lines(out_dir + "/inclusion.csv");
    REQUIRE(inclusion_rows.size() == 1 + part.n_blocks * d);
    CHECK(inclusion_rows[0] == "cluster,coordinate,probability");
    for (std::size_t i = 1; i < inclusion_rows.size(); ++i) {
        const double p = std::stod(fields(inclusion_rows[i])[2]);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }

    const std::vector<std::string> exclusion_rows =
        file_lines(out_dir + "/global_exclusion.csv");
    REQUIRE(exclusion_rows.size() == 1 + d);
    CHECK(exclusion_rows[0] == "coordinate,probability");
    for (std::size_t dd = 0; dd < d; ++dd) {
        const std::vector<std::string> f = fields(exclusion_rows[dd + 1]);
        CHECK(std::stod(f[1]) ==
              doctest::Approx(global_exclusion_probability(trace, dd))
                  .epsilon(1e-15));
    }
}

TEST_CASE("summarize degenerates cleanly on a single retained snapshot") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string out_fit = dir.file("single");
    const CommandResult fit = run_cli(
        "fit --data " + data_path +
            " --iterations 21 --burn-in 20 --seed 5 --out " + out_fit,
        dir, "single_fit");
    REQUIRE_MESSAGE(fit.status == 0, fit.err);
    const std::string out_dir = dir.file("single_sum");
    const CommandResult r = run_cli(
        "summarize --trace " + out_fit + "/fit_trace.jsonl --data " +
            data_path + " --out " + out_dir,
        dir, "single_sum");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const std::vector<std::string> k_rows =
        file_lines(out_dir + "/k_posterior.csv");
    REQUIRE(k_rows.size() == 2);
    CHECK(std::stod(fields(k_rows[1])[1]) == 1.0);
}

TEST_CASE("summarize and evaluate refuse a dataset with a different checksum") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string trace_path = fixture_fit(dir, data_path, 5);

    Dataset tampered = generate_synthetic(fixture_spec()).data;
    tampered.y[0] += 1.0;
    const std::string tampered_path = dir.file("tampered.csv");
    write_dataset(tampered, tampered_path);

    const CommandResult s = run_cli(
        "summarize --trace " + trace_path + " --data " + tampered_path +
            " --out " + dir.file("ts"),
        dir, "tampered_sum");
    CHECK(s.status == 1);
    CHECK(s.err.find("checksum") != std::string::npos);

    const CommandResult e = run_cli(
        "evaluate --trace " + trace_path + " --data " + tampered_path +
            " --out " + dir.file("te"),
        dir, "tampered_eval");
    CHECK(e.status == 1);
    CHECK(e.err.find("checksum") != std::string::npos);
}

TEST_CASE("predict draws profiles inline, from files, and deterministically") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string trace_path = fixture_fit(dir, data_path, 5);
    const Trace trace = read_trace(trace_path);
    const std::size_t snapshots = trace.samples.size();

    const std::string args = "predict --trace " + trace_path +
                             " --profile 0,0 --profile 1,1 --seed 9 --out ";
    const CommandResult r1 = run_cli(args + dir.file("p1"), dir, "predict1");
    REQUIRE_MESSAGE(r1.status == 0, r1.err);

    const std::vector<std::string> draws =
        file_lines(dir.file("p1") + "/draws.csv");
    REQUIRE(draws.size() == 1 + 2 * snapshots);
    CHECK(draws[0] == "profile,snapshot,cluster,y,beta1,beta2");
    for (std::size_t i = 1; i < draws.size(); ++i) {
        const std::vector<std::string> f = fields(draws[i]);
        REQUIRE(f.size() == 6);
        CHECK(std::stoi(f[2]) >= 0); // 0 means a fresh cluster
        CHECK(std::isfinite(std::stod(f[3])));
    }

    const std::vector<std::string> summary =
        file_lines(dir.file("p1") + "/summary.csv");
    REQUIRE(summary.size() == 3);
    CHECK(summary[0] == "profile,draws,mean_y,sd_y,fresh_rate");
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const std::vector<std::string> f = fields(summary[i]);
        REQUIRE(f.size() == 5);
        CHECK(std::stoul(f[1]) == snapshots);
        CHECK(std::isfinite(std::stod(f[2])));
        const double fresh_rate = std::stod(f[4]);
        CHECK(fresh_rate >= 0.0);
        CHECK(fresh_rate <= 1.0);
    }

    // identical invocation reproduces the draws byte for byte
    const CommandResult r2 = run_cli(args + dir.file("p2"), dir, "predict2");
    REQUIRE(r2.status == 0);
    CHECK(slurp(dir.file("p1") + "/draws.csv") ==
          slurp(dir.file("p2") + "/draws.csv"));

    // profile file with one profile per line
    const std::string profile_file = dir.file("profiles.txt");
    {
        std::ofstream out(profile_file);
        out << "0,1\n1,0\n";
    }
    const CommandResult r3 = run_cli(
        "predict --trace " + trace_path + " --profile " + profile_file +
            " --out " + dir.file("p3"),
        dir, "predict3");
    REQUIRE_MESSAGE(r3.status == 0, r3.err);
    CHECK(file_lines(dir.file("p3") + "/draws.csv").size() ==
          1 + 2 * snapshots);

    const CommandResult wrong_len = run_cli(
        "predict --trace " + trace_path + " --profile 0,1,1 --out " +
            dir.file("p4"),
        dir, "wrong_len");
    CHECK(wrong_len.status == 1);
    CHECK(wrong_len.err.find("expected 2") != std::string::npos);

    const CommandResult bad_token = run_cli(
        "predict --trace " + trace_path + " --profile 0,2 --out " +
            dir.file("p5"),
        dir, "bad_token");
    CHECK(bad_token.status == 1);
    CHECK(bad_token.err.find("not 0 or 1") != std::string::npos);
}

TEST_CASE("evaluate scores each trace at the requested quartiles") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string t1 = fixture_fit(dir, data_path, 5);
    const std::string t2 = fixture_fit(dir, data_path, 6);
    const Trace trace = read_trace(t1);
    const std::size_t snapshots = trace.samples.size();

    const CommandResult r = run_cli(
        "evaluate --trace " + t1 + " --trace " + t2 + " --data " + data_path +
            " --out " + dir.file("ev"),
        dir, "evaluate");
    REQUIRE_MESSAGE(r.status == 0, r.err);

    const std::vector<std::string> brier =
        file_lines(dir.file("ev") + "/brier.csv");
    REQUIRE(brier.size() == 1 + 2 * 3); // 2 traces x 3 default quartiles
    CHECK(brier[0] ==
          "trace,quartile,threshold,mean,p025,p25,p50,p75,p975,snapshots");
    const Dataset data = load_dataset(data_path, "y");
    for (std::size_t i = 1; i < brier.size(); ++i) {
        const std::vector<std::string> f = fields(brier[i]);
        REQUIRE(f.size() == 10);
        const double mean = std::stod(f[3]);
        CHECK(mean >= 0.0);
        CHECK(mean <= 1.0);
        CHECK(std::stoul(f[9]) == snapshots);
        if (f[1] == "q2")
            CHECK(std::stod(f[2]) == empirical_quantile(data.y, 0.5));
    }

    const std::vector<std::string> scores =
        file_lines(dir.file("ev") + "/scores.csv");
    CHECK(scores.size() == 1 + 2 * 3 * snapshots);
    CHECK(scores[0] == "trace,quartile,snapshot,score");

    const CommandResult one = run_cli(
        "evaluate --trace " + t1 + " --data " + data_path +
            " --quartile q2 --out " + dir.file("ev2"),
        dir, "evaluate_q2");
    REQUIRE_MESSAGE(one.status == 0, one.err);
    CHECK(file_lines(dir.file("ev2") + "/brier.csv").size() == 2);

    const CommandResult two = run_cli(
        "evaluate --trace " + t1 + " --data " + data_path +
            " --quartile q1,q3 --out " + dir.file("ev3"),
        dir, "evaluate_q13");
    REQUIRE_MESSAGE(two.status == 0, two.err);
    CHECK(file_lines(dir.file("ev3") + "/brier.csv").size() == 3);

    const CommandResult bad = run_cli(
        "evaluate --trace " + t1 + " --data " + data_path +
            " --quartile median --out " + dir.file("ev4"),
        dir, "evaluate_bad");
    CHECK(bad.status == 1);
    CHECK(bad.err.find("unknown quartile") != std::string::npos);
}

TEST_CASE("diagnose reports potential scale reduction per statistic") {
    testsupport::TempDir dir;
    const std::string data_path = write_fixture_data(dir);
    const std::string t1 = fixture_fit(dir, data_path, 5);
    const std::string t2 = fixture_fit(dir, data_path, 6);

    // duplicated chain: between-chain variance is zero, so every varying
    // statistic lands exactly at sqrt((L - 1) / L)
    const CommandResult dup = run_cli(
        "diagnose --trace " + t1 + " --trace " + t1 + " --out " +
            dir.file("dup"),
        dir, "dup");
    REQUIRE_MESSAGE(dup.status == 0, dup.err);
    const std::vector<std::string> dup_rows =
        file_lines(dir.file("dup") + "/rhat.csv");
    REQUIRE(dup_rows.size() == 5);
    CHECK(dup_rows[0] == "statistic,rhat");
    const Trace trace = read_trace(t1);
    const double len = static_cast<double>(trace.samples.size());
    const double expected = std::sqrt((len - 1.0) / len);
    for (const char* name : {"lambda", "alpha", "mean_abs_beta"}) {
        bool found = false;
        for (std::size_t i = 1; i < dup_rows.size(); ++i) {
            const std::vector<std::string> f = fields(dup_rows[i]);
            REQUIRE(f.size() == 2);
            if (f[0] != name) continue;
            found = true;
            // constant-in-both-chains statistics print nan instead
            if (f[1] != "nan")
                CHECK_MESSAGE(std::stod(f[1]) ==
                                  doctest::Approx(expected).epsilon(1e-12),
                              "statistic " << name);
        }
        CHECK_MESSAGE(found, "missing row for " << name);
    }

    // two genuinely different seeds on easy data stay near 1
    const CommandResult r = run_cli(
        "diagnose --trace " + t1 + " --trace " + t2 + " --out " +
            dir.file("two"),
        dir, "two");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const std::vector<std::string> rows =
        file_lines(dir.file("two") + "/rhat.csv");
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::vector<std::string> f = fields(rows[i]);
        if (f[1] == "nan" || f[1] == "inf") continue;
        CHECK(std::stod(f[1]) < 3.0);
    }

    const CommandResult single = run_cli(
        "diagnose --trace " + t1 + " --out " + dir.file("one"), dir,
        "single");
    CHECK(single.status == 1);
    CHECK(single.err.find("at least two") != std::string::npos);
}
