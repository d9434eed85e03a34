#include "s3r/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "s3r/random.hpp"
#include "s3r/rca.hpp"

namespace s3r {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<std::string> split_fields(const std::string& line, char delim, std::size_t number) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (ch == delim) {
      out.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError(number, "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  char delim = ',';
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (number == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    if (trim(raw).empty()) continue;
    if (lines.empty() && raw.find('\t') != std::string::npos) delim = '\t';
    lines.push_back({number, split_fields(raw, delim, number)});
  }
  if (lines.empty()) throw ParseError(0, "file is empty");
  return lines;
}

std::int64_t parse_count(const std::string& field, std::size_t line) {
  const std::string s = trim(field);
  if (s.empty()) return 0;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    double d = 0.0;
    auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (dec != std::errc() || dptr != s.data() + s.size() || !std::isfinite(d) || d != std::floor(d) ||
        std::abs(d) > 9.0e15) {
      throw ParseError(line, "count '" + s + "' is not an integer");
    }
    v = static_cast<std::int64_t>(d);
  }
  if (v < 0) throw ParseError(line, "negative count " + s);
  return v;
}

double parse_value(const std::string& field, std::size_t line) {
  const std::string s = trim(field);
  if (s.empty()) return 0.0;
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(d)) {
    throw ParseError(line, "value '" + s + "' is not a number");
  }
  if (d < 0.0) throw ParseError(line, "negative value " + s);
  return d;
}

class LabelIndex {
 public:
  explicit LabelIndex(const char* kind) : kind_(kind) {}

  std::size_t insert_unique(const std::string& label, std::size_t line) {
    if (label.empty()) throw ParseError(line, std::string("empty ") + kind_ + " label");
    if (!index_.emplace(label, labels_.size()).second) {
      throw ParseError(line, std::string("duplicate ") + kind_ + " label '" + label + "'");
    }
    labels_.push_back(label);
    return labels_.size() - 1;
  }

  std::size_t find_or_insert(const std::string& label, std::size_t line) {
    if (label.empty()) throw ParseError(line, std::string("empty ") + kind_ + " label");
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    return insert_unique(label, line);
  }

  std::vector<std::string>& labels() { return labels_; }

 private:
  const char* kind_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> labels_;
};

CountMatrix finish(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> counts,
                   std::vector<std::pair<std::size_t, double>> raw_values,
                   std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                   Preprocess mode) {
  if (n_rows == 0 || n_cols == 0) throw ParseError(0, "matrix has no rows or no columns");
  if (mode == Preprocess::kNone) {
    return CountMatrix(n_rows, n_cols, std::move(counts), std::move(row_labels), std::move(col_labels));
  }
  DenseMatrix<double> raw(n_rows, n_cols);
  for (const auto& [flat, v] : raw_values) raw.data()[flat] = v;
  return rca_transform(raw, std::move(row_labels), std::move(col_labels),
                       mode == Preprocess::kRcaBinary ? RcaMode::kBinary : RcaMode::kRound);
}

CountMatrix parse_dense(const std::vector<Line>& lines, Preprocess mode) {
  const Line& header = lines.front();
  if (header.fields.size() < 2) throw ParseError(header.number, "header has no column labels");
  LabelIndex cols("column");
  for (std::size_t j = 1; j < header.fields.size(); ++j) cols.insert_unique(trim(header.fields[j]), header.number);
  const std::size_t D = cols.labels().size();

  LabelIndex rows("row");
  std::vector<Triplet> counts;
  std::vector<std::pair<std::size_t, double>> raw_values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.fields.size() != D + 1) {
      throw ParseError(line.number, "expected " + std::to_string(D + 1) + " fields, found " +
                                        std::to_string(line.fields.size()));
    }
    const std::size_t n = rows.insert_unique(trim(line.fields[0]), line.number);
    for (std::size_t d = 0; d < D; ++d) {
      if (mode == Preprocess::kNone) {
        const auto v = parse_count(line.fields[d + 1], line.number);
        if (v > 0) counts.push_back({n, d, v});
      } else {
        const double v = parse_value(line.fields[d + 1], line.number);
        if (v > 0.0) raw_values.emplace_back(n * D + d, v);
      }
    }
  }
  const std::size_t N = rows.labels().size();
  return finish(N, D, std::move(counts), std::move(raw_values), std::move(rows.labels()),
                std::move(cols.labels()), mode);
}

CountMatrix parse_triplet(const std::vector<Line>& lines, Preprocess mode) {
  const Line& header = lines.front();
  if (header.fields.size() != 3) throw ParseError(header.number, "triplet header must have 3 fields");
  LabelIndex rows("row");
  LabelIndex cols("column");
  struct Entry {
    std::size_t row, col, line;
    std::int64_t count;
    double value;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.fields.size() != 3) {
      throw ParseError(line.number, "expected 3 fields, found " + std::to_string(line.fields.size()));
    }
    Entry e{rows.find_or_insert(trim(line.fields[0]), line.number),
            cols.find_or_insert(trim(line.fields[1]), line.number), line.number, 0, 0.0};
    if (mode == Preprocess::kNone) {
      e.count = parse_count(line.fields[2], line.number);
    } else {
      e.value = parse_value(line.fields[2], line.number);
    }
    entries.push_back(e);
  }
  const std::size_t N = rows.labels().size();
  const std::size_t D = cols.labels().size();
  std::unordered_set<std::size_t> seen;
  std::vector<Triplet> counts;
  std::vector<std::pair<std::size_t, double>> raw_values;
  for (const Entry& e : entries) {
    if (!seen.insert(e.row * D + e.col).second) {
      throw ParseError(e.line, "duplicate entry (" + rows.labels()[e.row] + ", " + cols.labels()[e.col] + ")");
    }
    if (e.count > 0) counts.push_back({e.row, e.col, e.count});
    if (e.value > 0.0) raw_values.emplace_back(e.row * D + e.col, e.value);
  }
  return finish(N, D, std::move(counts), std::move(raw_values), std::move(rows.labels()),
                std::move(cols.labels()), mode);
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\t\"") == std::string::npos && trim(field) == field) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

FileFormat parse_file_format(const std::string& name) {
  if (name == "dense") return FileFormat::kDense;
  if (name == "triplet") return FileFormat::kTriplet;
  throw std::invalid_argument("unknown format '" + name + "' (expected dense or triplet)");
}

std::string to_string(FileFormat format) { return format == FileFormat::kDense ? "dense" : "triplet"; }

Preprocess parse_preprocess(const std::string& name) {
  if (name == "none") return Preprocess::kNone;
  if (name == "rca-round") return Preprocess::kRcaRound;
  if (name == "rca-binary") return Preprocess::kRcaBinary;
  throw std::invalid_argument("unknown preprocessing mode '" + name + "' (expected none, rca-round or rca-binary)");
}

std::string to_string(Preprocess mode) {
  switch (mode) {
    case Preprocess::kNone:
      return "none";
    case Preprocess::kRcaRound:
      return "rca-round";
    case Preprocess::kRcaBinary:
      return "rca-binary";
  }
  return "none";
}

CountMatrix parse_counts(const std::string& text, FileFormat format, Preprocess mode) {
  const auto lines = tokenize(text);
  return format == FileFormat::kDense ? parse_dense(lines, mode) : parse_triplet(lines, mode);
}

CountMatrix load_counts(const std::filesystem::path& path, FileFormat format, Preprocess mode) {
  return parse_counts(read_text_file(path), format, mode);
}

std::string format_counts(const CountMatrix& data, FileFormat format) {
  std::ostringstream out;
  const auto& rl = data.row_labels();
  const auto& cl = data.col_labels();
  if (format == FileFormat::kDense) {
    out << "row";
    for (const auto& c : cl) out << ',' << quote(c);
    out << '\n';
    for (std::size_t n = 0; n < data.n_rows(); ++n) {
      out << quote(rl[n]);
      for (std::size_t d = 0; d < data.n_cols(); ++d) out << ',' << data.at(n, d);
      out << '\n';
    }
    return out.str();
  }
  // Column 0 and row 0 are written in full first so that labels keep their
  // order (and empty rows and columns survive) on reload.
  out << "row,col,count\n";
  for (std::size_t n = 0; n < data.n_rows(); ++n) {
    out << quote(rl[n]) << ',' << quote(cl[0]) << ',' << data.at(n, 0) << '\n';
  }
  for (std::size_t d = 1; d < data.n_cols(); ++d) {
    out << quote(rl[0]) << ',' << quote(cl[d]) << ',' << data.at(0, d) << '\n';
  }
  for (const Triplet& t : data.triplets()) {
    if (t.row == 0 || t.col == 0) continue;
    out << quote(rl[t.row]) << ',' << quote(cl[t.col]) << ',' << t.count << '\n';
  }
  return out.str();
}

void save_counts(const CountMatrix& data, const std::filesystem::path& path, FileFormat format) {
  write_file_atomic(path, format_counts(data, format));
}

ObservationMask make_split(const CountMatrix& data, double fraction, std::uint64_t seed,
                           std::size_t fold) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  const std::size_t N = data.n_rows();
  const std::size_t D = data.n_cols();
  const std::size_t cells = N * D;
  // Small tolerance so that e.g. 0.1 * 100 gives 10, not 11.
  const auto held = std::min(
      cells, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(cells) - 1e-9)));
  Rng rng = make_rng(seed, 0x5eed0000ULL + fold);
  std::vector<std::size_t> idx(cells);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(held);
  for (std::size_t i = 0; i < held; ++i) {
    const auto j = std::uniform_int_distribution<std::size_t>(i, cells - 1)(rng);
    std::swap(idx[i], idx[j]);
    out.emplace_back(idx[i] / D, idx[i] % D);
  }
  return ObservationMask(N, D, out);
}

std::vector<ObservationMask> make_splits(const CountMatrix& data, double fraction,
                                         std::size_t n_folds, std::uint64_t seed) {
  std::vector<ObservationMask> out;
  for (std::size_t f = 0; f < n_folds; ++f) out.push_back(make_split(data, fraction, seed, f));
  return out;
}

void RunConfig::validate() const {
  if (!(holdout > 0.0 && holdout < 1.0)) throw std::invalid_argument("holdout fraction must lie in (0, 1)");
  if (folds < 1) throw std::invalid_argument("folds must be at least 1");
  if (!options.is_object()) throw std::invalid_argument("options must be an object");
  hp.validate();
}

Json to_json(const RunConfig& config) {
  return Json{{"dataset", config.dataset},
              {"format", to_string(config.format)},
              {"preprocess", to_string(config.preprocess)},
              {"holdout", config.holdout},
              {"folds", config.folds},
              {"hyper_params", to_json(config.hp)},
              {"out", config.out},
              {"options", config.options}};
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("run config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") {
      c.dataset = value.get<std::string>();
    } else if (key == "format") {
      c.format = parse_file_format(value.get<std::string>());
    } else if (key == "preprocess") {
      c.preprocess = parse_preprocess(value.get<std::string>());
    } else if (key == "holdout") {
      c.holdout = value.get<double>();
    } else if (key == "folds") {
      c.folds = value.get<std::size_t>();
    } else if (key == "hyper_params") {
      c.hp = hyper_params_from_json(value);
    } else if (key == "out") {
      c.out = value.get<std::string>();
    } else if (key == "options") {
      c.options = value;
    } else {
      throw std::invalid_argument("unknown run config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

Json run_record(const RunConfig& config) {
  return Json{{"schema", kRunRecordSchema},
              {"code_version", S3R_VERSION},
              {"seed", config.hp.seed},
              {"config", to_json(config)}};
}

RunConfig run_config_from_record(const Json& record) {
  if (record.value("schema", std::string()) != kRunRecordSchema) {
    throw std::invalid_argument("not a run config record");
  }
  return run_config_from_json(record.at("config"));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace s3r
