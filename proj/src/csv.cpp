#include "ratefactor/csv.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ratefactor {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& what) {
  throw input_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_number(const std::string& field, const std::string& path,
                    std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty())
    fail(path, line, "expected a number, got '" + field + "'");
  return value;
}

long parse_count(const std::string& field, const std::string& path,
                 std::size_t line) {
  const double value = parse_number(field, path, line);
  if (!std::isfinite(value) || value < 0.0 || value != std::floor(value))
    fail(path, line, "counts must be nonnegative integers, got '" + field + "'");
  return long(value);
}

int parse_dow(const std::string& field, const std::string& path,
              std::size_t line) {
  const double value = parse_number(field, path, line);
  if (value != std::floor(value) || !is_weekday_code(int(value)))
    fail(path, line, "day-of-week must be 1 (Monday) .. 5 (Friday), got '" +
                         field + "'");
  return int(value);
}

void check_label(const std::string& label) {
  if (label.find(',') != std::string::npos ||
      label.find('\n') != std::string::npos ||
      label.find('\r') != std::string::npos)
    throw input_error("labels must not contain commas or line breaks: '" +
                      label + "'");
}

struct Table {
  std::vector<std::string> labels;  // columns after the two id columns
  std::vector<std::string> ids;     // first column
  std::vector<int> dow;             // second column
  std::vector<std::vector<std::string>> cells;
};

Table read_table(const std::string& path, const char* id_name,
                 bool has_dow_column) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);

  Table table;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t fixed = has_dow_column ? 2 : 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      fail(path, lineno, "blank line");
    }
    std::vector<std::string> fields = split_fields(line);
    if (lineno == 1) {
      if (fields.size() < fixed + 1)
        fail(path, lineno, "header needs at least one value column");
      if (fields[0] != id_name)
        fail(path, lineno, std::string("header must start with '") + id_name +
                               "', got '" + fields[0] + "'");
      if (has_dow_column && fields[1] != "dow")
        fail(path, lineno, "second header field must be 'dow', got '" +
                               fields[1] + "'");
      table.labels.assign(fields.begin() + long(fixed), fields.end());
      continue;
    }
    if (fields.size() != fixed + table.labels.size())
      fail(path, lineno,
           "expected " + std::to_string(fixed + table.labels.size()) +
               " fields, got " + std::to_string(fields.size()));
    table.ids.push_back(fields[0]);
    if (has_dow_column) table.dow.push_back(parse_dow(fields[1], path, lineno));
    table.cells.emplace_back(fields.begin() + long(fixed), fields.end());
  }
  if (lineno == 0) throw input_error(path + " is empty");
  if (table.cells.empty()) fail(path, lineno, "no data rows");
  return table;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw numeric_error("cannot format value");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp =
      target.parent_path() /
      (target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw input_error("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw input_error("cannot replace " + path + ": " + ec.message());
  }
}

CountMatrix read_counts_csv(const std::string& path) {
  const Table table = read_table(path, "date", true);
  CountMatrix counts;
  counts.interval_labels = table.labels;
  counts.dates = table.ids;
  counts.day_of_week = table.dow;
  counts.counts.resize(Eigen::Index(table.cells.size()),
                       Eigen::Index(table.labels.size()));
  for (std::size_t i = 0; i < table.cells.size(); ++i)
    for (std::size_t j = 0; j < table.labels.size(); ++j)
      counts.counts(Eigen::Index(i), Eigen::Index(j)) =
          double(parse_count(table.cells[i][j], path, i + 2));
  counts.validate();
  return counts;
}

void write_counts_csv(const CountMatrix& counts, const std::string& path) {
  counts.validate();
  for (const std::string& label : counts.interval_labels) check_label(label);
  for (const std::string& date : counts.dates) check_label(date);

  std::ostringstream out;
  out << "date,dow";
  for (const std::string& label : counts.interval_labels) out << ',' << label;
  out << '\n';
  for (int i = 0; i < counts.days(); ++i) {
    out << (counts.dates.empty() ? "day" + std::to_string(i + 1)
                                 : counts.dates[std::size_t(i)])
        << ',' << counts.day_of_week[std::size_t(i)];
    for (int j = 0; j < counts.intervals(); ++j)
      out << ',' << format_double(counts.counts(i, j));
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

RatesCsv read_rates_csv(const std::string& path) {
  const Table table = read_table(path, "date", true);
  RatesCsv rates;
  rates.interval_labels = table.labels;
  rates.dates = table.ids;
  rates.day_of_week = table.dow;
  rates.values.resize(Eigen::Index(table.cells.size()),
                      Eigen::Index(table.labels.size()));
  for (std::size_t i = 0; i < table.cells.size(); ++i)
    for (std::size_t j = 0; j < table.labels.size(); ++j) {
      const double v = parse_number(table.cells[i][j], path, i + 2);
      if (!std::isfinite(v)) fail(path, i + 2, "values must be finite");
      rates.values(Eigen::Index(i), Eigen::Index(j)) = v;
    }
  return rates;
}

void write_rates_csv(const RatesCsv& rates, const std::string& path) {
  const Eigen::Index n = rates.values.rows();
  const Eigen::Index m = rates.values.cols();
  if (rates.day_of_week.size() != std::size_t(n) ||
      rates.interval_labels.size() != std::size_t(m) ||
      (!rates.dates.empty() && rates.dates.size() != std::size_t(n)))
    throw input_error("rate table shapes are inconsistent");
  for (const std::string& label : rates.interval_labels) check_label(label);
  for (const std::string& date : rates.dates) check_label(date);

  std::ostringstream out;
  out << "date,dow";
  for (const std::string& label : rates.interval_labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out << (rates.dates.empty() ? "day" + std::to_string(i + 1)
                                : rates.dates[std::size_t(i)])
        << ',' << rates.day_of_week[std::size_t(i)];
    for (Eigen::Index j = 0; j < m; ++j)
      out << ',' << format_double(rates.values(i, j));
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_ensemble_csv(const Eigen::MatrixXd& ensemble,
                        const std::vector<std::string>& interval_labels,
                        const std::string& path) {
  if (interval_labels.size() != std::size_t(ensemble.cols()))
    throw input_error("ensemble width does not match the label count");
  for (const std::string& label : interval_labels) check_label(label);

  std::ostringstream out;
  out << "replicate";
  for (const std::string& label : interval_labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index b = 0; b < ensemble.rows(); ++b) {
    out << (b + 1);
    for (Eigen::Index j = 0; j < ensemble.cols(); ++j)
      out << ',' << format_double(ensemble(b, j));
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

Eigen::MatrixXd read_ensemble_csv(const std::string& path) {
  const Table table = read_table(path, "replicate", false);
  Eigen::MatrixXd ensemble(Eigen::Index(table.cells.size()),
                           Eigen::Index(table.labels.size()));
  for (std::size_t i = 0; i < table.cells.size(); ++i)
    for (std::size_t j = 0; j < table.labels.size(); ++j)
      ensemble(Eigen::Index(i), Eigen::Index(j)) =
          parse_number(table.cells[i][j], path, i + 2);
  return ensemble;
}

}  // namespace ratefactor
