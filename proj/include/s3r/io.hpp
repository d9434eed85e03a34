#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "s3r/count_matrix.hpp"
#include "s3r/hyper_params.hpp"
#include "s3r/serialization.hpp"

namespace s3r {

// File formats
//
// dense:   first line is a header whose first field is ignored and whose
//          remaining fields are column labels; every following line is a
//          row label followed by one value per column. Empty cells are 0.
// triplet: first line is the header "row,col,count"; every following line
//          is one (row_label, col_label, count). Labels are ordered by first
//          appearance. Zero counts are allowed and only declare labels.
//
// Fields are separated by ',' (or a tab when the header contains one) and
// may be double-quoted, with "" for a literal quote.

enum class FileFormat { kDense, kTriplet };
enum class Preprocess { kNone, kRcaRound, kRcaBinary };

FileFormat parse_file_format(const std::string& name);
std::string to_string(FileFormat format);
Preprocess parse_preprocess(const std::string& name);
std::string to_string(Preprocess mode);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// With kNone every value must be a non-negative integer. The RCA modes read
/// raw non-negative values and discretize their Balassa index.
CountMatrix load_counts(const std::filesystem::path& path, FileFormat format,
                        Preprocess mode = Preprocess::kNone);
CountMatrix parse_counts(const std::string& text, FileFormat format,
                         Preprocess mode = Preprocess::kNone);

std::string format_counts(const CountMatrix& data, FileFormat format);
void save_counts(const CountMatrix& data, const std::filesystem::path& path, FileFormat format);

/// n_folds independent masks, each holding out ceil(fraction * N * D) cells
/// drawn uniformly without replacement. Fold i depends only on (seed, i).
std::vector<ObservationMask> make_splits(const CountMatrix& data, double fraction,
                                         std::size_t n_folds, std::uint64_t seed);
ObservationMask make_split(const CountMatrix& data, double fraction, std::uint64_t seed,
                           std::size_t fold);

struct RunConfig {
  std::string dataset;
  FileFormat format = FileFormat::kDense;
  Preprocess preprocess = Preprocess::kNone;
  double holdout = 0.1;
  std::size_t folds = 10;
  HyperParams hp;
  std::string out;
  Json options = Json::object();  // command-specific settings

  /// Throws std::invalid_argument.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const Json& j);

inline constexpr const char* kRunRecordSchema = "s3r-ibp/run-config";

/// {"schema", "code_version", "seed", "config"} as written to every output
/// directory.
Json run_record(const RunConfig& config);
RunConfig run_config_from_record(const Json& record);

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

}  // namespace s3r
