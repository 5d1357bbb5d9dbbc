#include "csc/cli.hpp"
#include "csc/dataio.hpp"
#include "csc/evalkit.hpp"

#include <doctest.h>

#include <charconv>
#include <sstream>

using namespace csc;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "csc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("csc_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& rel) const { return (dir / rel).string(); }
};

double value_of(const std::string& csv, const std::string& key) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ",", 0) != 0) continue;
    const std::string v = line.substr(key.size() + 1);
    double x = 0.0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
  }
  FAIL("key not found: " << key);
  return 0.0;
}

// Every file under dir except the run record (which carries wall time).
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "run.json")
      files[fs::relative(e.path(), dir).string()] = read_text(e.path());
  return files;
}

std::vector<std::string> simulate_args(const Scratch& s, const std::string& out = "data") {
  return {"simulate", "--scenario", "structured", "--p", "6", "--g", "5", "--n", "12",
          "--n-test", "10", "--dict-size", "6", "--sigma", "0.1", "--seed", "7", "--out", s / out};
}

}  // namespace

TEST_CASE("simulate -> fit -> evaluate pipeline") {
  Scratch s("pipeline");
  Run r = cli(simulate_args(s));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(s.dir / "data" / "manifest.json"));
  CHECK(fs::exists(s.dir / "data" / "run.json"));

  r = cli({"fit", "csc", "--data", s / "data/manifest.json", "--k", "8", "--tau", "1.0", "--lambda", "0.05",
           "--max-alt", "10", "--inner", "5", "--seed", "7", "--out", s / "r1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(s.dir / "r1" / "model.json"));
  CHECK(fs::exists(s.dir / "r1" / "diagnostics.csv"));
  CHECK(fs::exists(s.dir / "r1" / "run.json"));

  r = cli({"evaluate", "--model", s / "r1", "--data", s / "data/manifest.json", "--truth"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const LoadedDataset data = load_dataset_full(s.dir / "data" / "manifest.json");
  const GroupedDataset test = load_dataset(data.test_manifest_path());
  const auto estimates = load_model(s.dir / "r1").model.regression_matrices();
  const EvalReport direct = evaluate(estimates, test, &data.truth->B_star);
  CHECK(value_of(r.out, "estimation_error") == direct.estimation_error);
  CHECK(value_of(r.out, "prediction_error") == direct.prediction_error);
  CHECK(value_of(r.out, "prediction_error[3]") == direct.per_group_prediction_error[3]);

  r = cli({"fit", "rrr", "--data", s / "data/manifest.json", "--radius", "2.0", "--out", s / "rrr"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(archive_kind(s.dir / "rrr") == "rrr");
  r = cli({"evaluate", "--model", s / "rrr", "--data", s / "data/manifest.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("estimation_error") == std::string::npos);

  r = cli({"encode", "--model", s / "r1", "--data", s / "data/manifest.json", "--out", s / "enc"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const LoadedModel enc = load_model(s.dir / "enc");
  const LoadedModel orig = load_model(s.dir / "r1");
  for (std::size_t k = 0; k < 8; ++k) CHECK(enc.model.dictionary.entries[k] == orig.model.dictionary.entries[k]);

  r = cli({"diagnose", "--model", s / "r1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("sparsity warning") != std::string::npos);
}

TEST_CASE("cross-validation and hold-two-out commands") {
  Scratch s("protocols");
  REQUIRE(cli(simulate_args(s)).code == 0);
  Run r = cli({"cv-lambda", "--data", s / "data/manifest.json", "--k", "6", "--grid", "0.01", "0.1", "1",
               "--folds", "3", "--max-alt", "4", "--inner", "3", "--out", s / "cv"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(s.dir / "cv" / "cv_curve.csv"));
  CHECK(r.out.find("best lambda") != std::string::npos);

  r = cli({"fit", "csc", "--data", s / "data/manifest.json", "--k", "6", "--grid", "0.01", "0.1", "--folds", "3",
           "--max-alt", "4", "--inner", "3", "--out", s / "auto"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(s.dir / "auto" / "cv_curve.csv"));
  const double chosen = load_model(s.dir / "auto").model.config.lambda;
  CHECK((chosen == 0.01 || chosen == 0.1));

  r = cli({"holdout2", "--data", s / "data/manifest.json", "--method", "both", "--trials", "6", "--k", "6",
           "--lambda", "0.05", "--max-alt", "4", "--inner", "3", "--radius", "2", "--out", s / "ho"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(s.dir / "ho" / "holdout_summary.csv"));
  CHECK(fs::exists(s.dir / "ho" / "holdout_sign_test.csv"));
  const std::string trials = read_text(s.dir / "ho" / "holdout_trials.csv");
  CHECK(std::count(trials.begin(), trials.end(), '\n') > 6);

  r = cli({"fit", "csc", "--data", s / "data/manifest.json", "--k", "6", "--lambda", "0.05", "--max-alt", "3",
           "--groups-subset", "0,2-3", "--out", s / "subset"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(load_model(s.dir / "subset").model.coefficients.size() == 5);
}

TEST_CASE("exit codes") {
  Scratch s("codes");
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"simulate", "--bogus-flag", "1", "--out", s / "x"}).code == kExitUsage);
  Run r = cli({"fit", "csc", "--k", "3"});  // --data missing
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"--help"}).code == kExitOk);

  CHECK(cli({"fit", "csc", "--data", s / "none/manifest.json", "--lambda", "0.1", "--out", s / "o"}).code ==
        kExitValidation);
  CHECK(cli({"simulate", "--scenario", "weird", "--out", s / "x"}).code == kExitUsage);
  REQUIRE(cli(simulate_args(s)).code == 0);
  CHECK(cli({"fit", "csc", "--data", s / "data/manifest.json", "--tau", "-1", "--lambda", "0.1", "--out",
             s / "o"}).code == kExitValidation);
  CHECK(cli({"fit", "csc", "--data", s / "data/manifest.json", "--lambda", "0.1", "--groups-subset", "9",
             "--out", s / "o"}).code == kExitValidation);
  write_text("1,2\n3\n", s.dir / "data" / "X_000.csv");
  r = cli({"fit", "rrr", "--data", s / "data/manifest.json", "--radius", "1", "--out", s / "o"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("non-finite arithmetic exits with the numerical code") {
  Scratch s("numerical");
  Matrix X = Matrix::Constant(2, 4, 1e300), Y = Matrix::Constant(2, 4, 1e300);
  X(0, 1) = -1e300;
  save_dataset(GroupedDataset({{X, Y}}), s.dir / "data");
  Run r = cli({"fit", "rrr", "--data", s / "data/manifest.json", "--radius", "1", "--out", s / "o"});
  CHECK_MESSAGE(r.code == kExitNumerical, r.err);
  r = cli({"fit", "csc", "--data", s / "data/manifest.json", "--k", "2", "--lambda", "0.1", "--out", s / "o"});
  CHECK_MESSAGE(r.code == kExitNumerical, r.err);
}

TEST_CASE("identical invocations give bitwise-identical archives") {
  Scratch s("repro");
  REQUIRE(cli(simulate_args(s, "d1")).code == 0);
  REQUIRE(cli(simulate_args(s, "d2")).code == 0);
  CHECK(snapshot(s.dir / "d1") == snapshot(s.dir / "d2"));
  for (const char* out : {"a", "b"}) {
    const Run r = cli({"fit", "csc", "--data", s / "d1/manifest.json", "--k", "8", "--lambda", "0.05", "--max-alt",
                       "6", "--seed", "3", "--out", s / out});
    REQUIRE(r.code == 0);
  }
  const auto a = snapshot(s.dir / "a"), b = snapshot(s.dir / "b");
  CHECK(a.size() == b.size());
  CHECK(a == b);
  REQUIRE(cli({"fit", "csc", "--data", s / "d1/manifest.json", "--k", "8", "--lambda", "0.05", "--max-alt", "6",
               "--seed", "4", "--out", s / "c"})
              .code == 0);
  CHECK(snapshot(s.dir / "c") != a);
}
