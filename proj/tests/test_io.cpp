#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "s3r/io.hpp"
#include "s3r/random.hpp"

using namespace s3r;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("s3r_io_tests_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::size_t error_line(const std::string& text, FileFormat format, Preprocess mode = Preprocess::kNone) {
  try {
    parse_counts(text, format, mode);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("dense parsing") {
  const CountMatrix m = parse_counts("country,a,b\nX,1,0\nY,2,3\n", FileFormat::kDense);
  CHECK(m.nonzeros() == 3);
  CHECK(m.n_rows() == 2);
  CHECK(m.row_labels()[1] == "Y");
  CHECK(m.col_labels()[1] == "b");
  CHECK(m.at(1, 1) == 3);
  // Empty cells are zeros; tabs and quoted labels are accepted.
  const CountMatrix t = parse_counts("id\t\"misc, oils\"\tb\r\nX\t\t4\r\n", FileFormat::kDense);
  CHECK(t.col_labels()[0] == "misc, oils");
  CHECK(t.at(0, 0) == 0);
  CHECK(t.at(0, 1) == 4);

  CHECK(error_line("h,a,b\nX,1,-2\n", FileFormat::kDense) == 2);
  CHECK(error_line("h,a,b\nX,1,2\nY,1.5,2\n", FileFormat::kDense) == 3);
  CHECK(error_line("h,a,a\nX,1,2\n", FileFormat::kDense) == 1);
  CHECK(error_line("h,a,b\nX,1,2\n\nX,1,2\n", FileFormat::kDense) == 4);
  CHECK(error_line("h,a,b\nX,1\n", FileFormat::kDense) == 2);
  CHECK(parse_counts("h,a\nX,2.0\n", FileFormat::kDense).at(0, 0) == 2);
}

TEST_CASE("triplet parsing") {
  const CountMatrix m = parse_counts("row,col,count\nX,a,1\nY,a,2\nY,b,3\n", FileFormat::kTriplet);
  CHECK(m.nonzeros() == 3);
  CHECK(m.at(1, 1) == 3);
  CHECK(error_line("row,col,count\nX,a,1\nY,a,2\nX,a,3\n", FileFormat::kTriplet) == 4);
  CHECK(error_line("row,col,count\nX,a,x\n", FileFormat::kTriplet) == 2);
}

TEST_CASE("rca preprocessing on load") {
  const CountMatrix r = parse_counts("h,x,y\nA,2,0\nB,1,1\n", FileFormat::kDense, Preprocess::kRcaRound);
  CHECK(r.at(0, 0) == 1);
  CHECK(r.at(1, 1) == 2);
  const CountMatrix b = parse_counts("h,x,y\nA,2,0\nB,1,1\n", FileFormat::kDense, Preprocess::kRcaBinary);
  CHECK(b.at(1, 0) == 0);
  CHECK(b.at(1, 1) == 1);
  // Real-valued exports are fine once preprocessed.
  CHECK_NOTHROW(parse_counts("h,x,y\nA,2.5,0.1\nB,1,1\n", FileFormat::kDense, Preprocess::kRcaRound));
  CHECK_THROWS(parse_counts("h,x,y\nA,0,0\nB,1,1\n", FileFormat::kDense, Preprocess::kRcaRound));
}

TEST_CASE("save then load is the identity for both formats") {
  Rng rng = make_rng(50);
  std::vector<Triplet> t;
  for (std::size_t n = 0; n < 7; ++n) {
    for (std::size_t d = 0; d < 5; ++d) {
      if (n != 3 && d != 2 && bernoulli(0.4, rng)) t.push_back({n, d, 1 + poisson_variate(3.0, rng)});
    }
  }
  std::vector<std::string> rows{"b", "a", "c, \"quoted\"", "empty row", "e", "f", "g"};
  std::vector<std::string> cols{"z", "y", "empty col", "w", "v"};
  const CountMatrix m(7, 5, t, rows, cols);
  for (auto format : {FileFormat::kDense, FileFormat::kTriplet}) {
    const fs::path p = scratch(format == FileFormat::kDense ? "m.csv" : "m.triplets");
    save_counts(m, p, format);
    CHECK(load_counts(p, format) == m);
  }
  // The first row and column may be empty too.
  const CountMatrix corner(2, 2, {{1, 1, 4}});
  CHECK(parse_counts(format_counts(corner, FileFormat::kTriplet), FileFormat::kTriplet) == corner);
}

TEST_CASE("splits") {
  const CountMatrix m(10, 10, {{0, 0, 1}});
  const auto folds = make_splits(m, 0.1, 10, 7);
  CHECK(folds.size() == 10);
  for (const auto& f : folds) CHECK(f.held_out_count() == 10);
  CHECK(folds[0] != folds[1]);
  CHECK(make_split(m, 0.1, 7, 3) == folds[3]);
  CHECK(make_split(m, 0.15, 7, 0).held_out_count() == 15);
  CHECK(make_split(CountMatrix(3, 3, {}), 0.5, 1, 0).held_out_count() == 5);
  CHECK_THROWS(make_split(m, 0.0, 7, 0));
  CHECK_THROWS(make_split(m, 1.0, 7, 0));
  RunConfig rc;
  CHECK(rc.folds == 10);
}

TEST_CASE("run config round trip") {
  RunConfig rc;
  rc.dataset = "/data/x.csv";
  rc.format = FileFormat::kTriplet;
  rc.preprocess = Preprocess::kRcaBinary;
  rc.holdout = 0.2;
  rc.folds = 3;
  rc.hp.k_max = 12;
  rc.hp.seed = 99;
  rc.out = "/tmp/out";
  rc.options = Json{{"fold", 1}, {"command", "fit"}};
  CHECK(run_config_from_json(Json::parse(to_json(rc).dump())) == rc);
  const Json record = run_record(rc);
  CHECK(record["seed"] == 99);
  CHECK(record["code_version"] == S3R_VERSION);
  CHECK(run_config_from_record(Json::parse(record.dump())) == rc);
  CHECK_THROWS(run_config_from_json(Json{{"holdout", 1.0}}));
  CHECK_THROWS(run_config_from_json(Json{{"unknown", 1}}));
}

TEST_CASE("atomic writes leave no temporary files") {
  const fs::path p = scratch("atomic.txt");
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  CHECK(read_text_file(p) == "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) {
    if (e.path().filename().string().rfind("atomic.txt", 0) == 0) ++files;
  }
  CHECK(files == 1);
  CHECK_THROWS(write_file_atomic(p.parent_path() / "missing" / "x.txt", "data"));
  CHECK_THROWS(read_json(p));
}

}  // TEST_SUITE
