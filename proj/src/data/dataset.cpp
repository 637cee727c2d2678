#include "ttr/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"
#include "ttr/util/text.hpp"

namespace ttr::data {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::Binary:
      return "binary";
    case Task::Multiclass:
      return "multiclass";
    case Task::Regression:
      return "regression";
  }
  return "?";
}

Task task_from_name(std::string_view name) {
  if (name == "binary") return Task::Binary;
  if (name == "multiclass") return Task::Multiclass;
  if (name == "regression") return Task::Regression;
  throw ConfigError("unknown task '" + std::string(name) +
                    "' (expected binary, multiclass or regression)");
}

namespace {

// One parsed CSV cell. Views point into the file buffer or into `arena`
// (cells with escaped quotes get materialized there).
struct CsvTable {
  std::vector<std::string_view> header;
  std::vector<std::vector<std::string_view>> rows;
  std::deque<std::string> arena;
};

std::vector<std::string_view> split_line(std::string_view line, std::size_t lineno,
                                         const std::string& origin,
                                         std::deque<std::string>& arena) {
  std::vector<std::string_view> cells;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (true) {
    if (i < n && line[i] == '"') {
      // Quoted cell; "" escapes a quote.
      std::string out;
      bool materialized = false;
      const std::size_t start = ++i;
      while (true) {
        if (i >= n) {
          throw ParseError(origin + ":" + std::to_string(lineno) +
                           ": unterminated quoted cell");
        }
        if (line[i] == '"') {
          if (i + 1 < n && line[i + 1] == '"') {
            if (!materialized) {
              out.assign(line.substr(start, i - start));
              materialized = true;
            }
            out.push_back('"');
            i += 2;
            continue;
          }
          break;
        }
        if (materialized) out.push_back(line[i]);
        ++i;
      }
      if (materialized) {
        arena.push_back(std::move(out));
        cells.emplace_back(arena.back());
      } else {
        cells.push_back(line.substr(start, i - start));
      }
      ++i;  // closing quote
      if (i < n && line[i] != ',') {
        throw ParseError(origin + ":" + std::to_string(lineno) +
                         ": unexpected text after closing quote");
      }
    } else {
      const std::size_t start = i;
      while (i < n && line[i] != ',') ++i;
      cells.push_back(trim(line.substr(start, i - start)));
    }
    if (i >= n) break;
    ++i;  // separator
  }
  return cells;
}

CsvTable parse_csv(std::string_view text, const std::string& origin) {
  CsvTable table;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++lineno;
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    auto cells = split_line(line, lineno, origin, table.arena);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InputError(origin + ": empty file");
  if (table.rows.empty()) throw InputError(origin + ": no data rows");
  return table;
}

bool is_binary_value(double v) { return v == 0.0 || v == 1.0; }

ColumnKind infer_kind(const CsvTable& table, std::size_t col) {
  bool all_numeric = true;
  bool all_binary = true;
  bool any_value = false;
  std::set<std::string_view> distinct;
  for (const auto& row : table.rows) {
    const std::string_view cell = row[col];
    if (cell.empty()) continue;
    any_value = true;
    if (const auto v = parse_double(cell)) {
      if (!is_binary_value(*v)) all_binary = false;
    } else {
      all_numeric = false;
      all_binary = false;
    }
    if (!all_numeric && distinct.size() <= 33) distinct.insert(cell);
  }
  if (!any_value) return ColumnKind::CategoricalExpanded;
  if (all_binary) return ColumnKind::Binary;
  if (all_numeric) return ColumnKind::Continuous;
  // Re-scan so the distinct count covers numeric-looking cells too.
  distinct.clear();
  for (const auto& row : table.rows) {
    if (!row[col].empty()) distinct.insert(row[col]);
    if (distinct.size() > 32) return ColumnKind::Continuous;
  }
  return ColumnKind::CategoricalExpanded;
}

[[noreturn]] void cell_error(const std::string& origin, std::size_t row,
                             std::string_view column, const std::string& what) {
  // Data row numbering is 1-based and excludes the header line.
  throw ParseError(origin + ": row " + std::to_string(row + 1) + ", column '" +
                   std::string(column) + "': " + what);
}

bool numeric_less(const std::string& a, const std::string& b) {
  const auto va = parse_double(a);
  const auto vb = parse_double(b);
  if (va && vb) {
    if (*va != *vb) return *va < *vb;
    return a < b;
  }
  return a < b;
}

}  // namespace

Dataset load_csv_text(std::string_view text, const std::string& target_column,
                      Task task, const DeclaredKinds& declared,
                      const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);

  {
    std::set<std::string_view> names;
    for (const auto& name : table.header) {
      if (!names.insert(name).second) {
        throw InputError(origin + ": duplicate column '" + std::string(name) + "'");
      }
    }
  }

  int target = -1;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == target_column) target = static_cast<int>(c);
  }
  if (target < 0) {
    throw ConfigError(origin + ": target column '" + target_column + "' not found");
  }

  const std::size_t num_rows = table.rows.size();
  Dataset ds;
  ds.task = task;
  ds.rows = num_rows;

  // Pass 1: decide each source column's kind and collect category labels.
  struct SourceColumn {
    std::size_t index;
    ColumnKind kind;
    std::vector<std::string> labels;  // categorical only, sorted
  };
  std::vector<SourceColumn> sources;
  int next_group = 0;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<int>(c) == target) continue;
    const std::string name(table.header[c]);
    ColumnKind kind;
    if (const auto it = declared.find(name); it != declared.end()) {
      kind = it->second;
    } else {
      kind = infer_kind(table, c);
    }
    SourceColumn src{c, kind, {}};
    if (kind == ColumnKind::CategoricalExpanded) {
      std::set<std::string> labels;
      for (const auto& row : table.rows) {
        if (!row[c].empty()) labels.insert(std::string(row[c]));
      }
      if (labels.empty()) {
        throw InputError(origin + ": column '" + name + "' has no values");
      }
      src.labels.assign(labels.begin(), labels.end());
      std::sort(src.labels.begin(), src.labels.end());
      int col_in_group = 0;
      for (const auto& label : src.labels) {
        Column column;
        column.name = name + "=" + label;
        column.kind = ColumnKind::CategoricalExpanded;
        column.group_id = next_group;
        column.category_label = label;
        ds.schema.columns.push_back(std::move(column));
        ++col_in_group;
      }
      ++next_group;
    } else {
      Column column;
      column.name = name;
      column.kind = kind;
      ds.schema.columns.push_back(std::move(column));
    }
    sources.push_back(std::move(src));
  }
  ds.schema.validate();
  ds.cols = ds.schema.size();
  if (ds.cols == 0) throw InputError(origin + ": no feature columns");

  // Pass 2: fill the expanded matrix.
  ds.x.assign(num_rows * ds.cols, 0.0f);
  std::size_t out_col = 0;
  for (const SourceColumn& src : sources) {
    const std::string_view name = table.header[src.index];
    if (src.kind == ColumnKind::CategoricalExpanded) {
      std::map<std::string_view, std::size_t> label_slot;
      for (std::size_t i = 0; i < src.labels.size(); ++i) {
        label_slot[src.labels[i]] = out_col + i;
      }
      for (std::size_t r = 0; r < num_rows; ++r) {
        const std::string_view cell = table.rows[r][src.index];
        if (cell.empty()) continue;  // missing category: all-zero group
        ds.x[r * ds.cols + label_slot.at(cell)] = 1.0f;
      }
      out_col += src.labels.size();
    } else {
      for (std::size_t r = 0; r < num_rows; ++r) {
        const std::string_view cell = table.rows[r][src.index];
        if (cell.empty()) cell_error(origin, r, name, "missing value");
        const auto v = parse_double(cell);
        if (!v) cell_error(origin, r, name, "cannot parse '" + std::string(cell) + "'");
        if (src.kind == ColumnKind::Binary && !is_binary_value(*v)) {
          cell_error(origin, r, name,
                     "binary column holds '" + std::string(cell) + "'");
        }
        ds.x[r * ds.cols + out_col] = static_cast<float>(*v);
      }
      ++out_col;
    }
  }

  // Targets.
  ds.y.resize(num_rows);
  if (task == Task::Regression) {
    for (std::size_t r = 0; r < num_rows; ++r) {
      const std::string_view cell = table.rows[r][static_cast<std::size_t>(target)];
      if (cell.empty()) cell_error(origin, r, target_column, "missing target");
      const auto v = parse_double(cell);
      if (!v) {
        cell_error(origin, r, target_column,
                   "cannot parse '" + std::string(cell) + "'");
      }
      ds.y[r] = *v;
    }
    double mean = 0.0;
    for (const double v : ds.y) mean += v;
    mean /= static_cast<double>(num_rows);
    double var = 0.0;
    for (const double v : ds.y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(num_rows);
    double sd = std::sqrt(var);
    if (sd == 0.0) sd = 1.0;
    for (double& v : ds.y) v = (v - mean) / sd;
    ds.target_affine = {mean, sd};
    ds.num_classes = 0;
  } else {
    std::set<std::string> labels;
    for (std::size_t r = 0; r < num_rows; ++r) {
      const std::string_view cell = table.rows[r][static_cast<std::size_t>(target)];
      if (cell.empty()) cell_error(origin, r, target_column, "missing target");
      labels.insert(std::string(cell));
    }
    ds.class_labels.assign(labels.begin(), labels.end());
    std::sort(ds.class_labels.begin(), ds.class_labels.end(), numeric_less);
    if (task == Task::Binary && ds.class_labels.size() != 2) {
      throw InputError(origin + ": binary task needs exactly 2 target values, found " +
                       std::to_string(ds.class_labels.size()));
    }
    if (ds.class_labels.size() < 2) {
      throw InputError(origin + ": target column '" + target_column +
                       "' has a single value");
    }
    std::map<std::string, std::size_t> ids;
    for (std::size_t i = 0; i < ds.class_labels.size(); ++i) {
      ids[ds.class_labels[i]] = i;
    }
    for (std::size_t r = 0; r < num_rows; ++r) {
      const std::string_view cell = table.rows[r][static_cast<std::size_t>(target)];
      ds.y[r] = static_cast<double>(ids.at(std::string(cell)));
    }
    ds.num_classes = ds.class_labels.size();
  }
  return ds;
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 Task task, const DeclaredKinds& declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return load_csv_text(text, target_column, task, declared, path);
}

SplitPlan kfold_split(const Dataset& ds, std::uint64_t seed, int num_folds) {
  if (num_folds < 2) throw ContractError("kfold_split: need at least 2 folds");
  const std::size_t n = ds.rows;
  if (n < static_cast<std::size_t>(num_folds)) {
    throw InputError("kfold_split: " + std::to_string(n) + " rows cannot fill " +
                     std::to_string(num_folds) + " folds");
  }
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  Rng rng(seed);
  rng.shuffle(order);

  SplitPlan plan;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(num_folds));
  std::size_t start = 0;
  for (int f = 0; f < num_folds; ++f) {
    const std::size_t size =
        n / static_cast<std::size_t>(num_folds) +
        (static_cast<std::size_t>(f) < n % static_cast<std::size_t>(num_folds) ? 1 : 0);
    auto& fold = plan.folds[static_cast<std::size_t>(f)];
    fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(start + size));
    fold.train.reserve(n - size);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < start || i >= start + size) fold.train.push_back(order[i]);
    }
    std::sort(fold.test.begin(), fold.test.end());
    std::sort(fold.train.begin(), fold.train.end());
    start += size;
  }
  return plan;
}

std::vector<OneHotViolation> validate_onehot(const Dataset& ds) {
  std::vector<OneHotViolation> violations;
  const auto groups = ds.schema.onehot_groups();
  for (std::uint32_t r = 0; r < ds.rows; ++r) {
    const auto row = ds.row(r);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      int set_count = 0;
      for (const int c : groups[g]) {
        if (row[static_cast<std::size_t>(c)] != 0.0f) ++set_count;
      }
      if (set_count > 1) {
        OneHotViolation v;
        v.row = r;
        v.group_id = static_cast<int>(g);
        for (const int c : groups[g]) {
          if (row[static_cast<std::size_t>(c)] != 0.0f) {
            v.columns_set.push_back(ds.schema.columns[static_cast<std::size_t>(c)].name);
          }
        }
        violations.push_back(std::move(v));
      }
    }
  }
  return violations;
}

TargetAffine target_stats(const Dataset& ds, std::span<const std::uint32_t> rows) {
  if (rows.empty()) throw ContractError("target_stats: empty row list");
  double mean = 0.0;
  for (const std::uint32_t r : rows) mean += ds.y[r];
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (const std::uint32_t r : rows) {
    const double d = ds.y[r] - mean;
    var += d * d;
  }
  var /= static_cast<double>(rows.size());
  double sd = std::sqrt(var);
  if (sd == 0.0) sd = 1.0;
  return {mean, sd};
}

}  // namespace ttr::data
