#include "ttr/rules/text_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "ttr/util/error.hpp"
#include "ttr/util/fs.hpp"
#include "ttr/util/text.hpp"

namespace ttr::rules {

namespace {

bool name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '/' ||
         c == '=' || c == '+' || c == '-';
}

bool is_keyword(std::string_view w) {
  return w == "TRUE" || w == "FALSE" || w == "NOT" || w == "AND" ||
         w == "OR" || w == "RULE" || w == "WEIGHTS" || w == "BIAS";
}

std::string quote_name(std::string_view name) {
  bool plain = !name.empty() && !is_keyword(name);
  for (const char c : name) {
    if (!name_char(c)) plain = false;
  }
  if (plain) return std::string(name);
  std::string out = "\"";
  for (const char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_numbers(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out.push_back(',');
    out += format_double(vs[i]);
  }
  return out;
}

std::string literal_text(const Rule& rule, const logic::Literal& lit) {
  const Condition& cond = rule.conditions[lit.bit];
  const std::string name = quote_name(cond.feature);
  switch (cond.form) {
    case ConditionForm::IsTrue:
      return lit.positive ? name : "NOT " + name;
    case ConditionForm::IsFalse:
      return lit.positive ? "NOT " + name : name;
    case ConditionForm::GreaterThan:
      return name + (lit.positive ? " > " : " <= ") +
             format_double(cond.threshold);
    case ConditionForm::LessThan:
      return name + (lit.positive ? " < " : " >= ") +
             format_double(cond.threshold);
    case ConditionForm::ConstTrue:
      return lit.positive ? "TRUE" : "FALSE";
    case ConditionForm::ConstFalse:
      return lit.positive ? "FALSE" : "TRUE";
  }
  return "FALSE";
}

std::string dnf_text(const Rule& rule) {
  if (rule.dnf.is_constant_false()) return "(FALSE)";
  std::string out;
  for (std::size_t ci = 0; ci < rule.dnf.clauses.size(); ++ci) {
    if (ci) out += " OR ";
    const logic::Clause& clause = rule.dnf.clauses[ci];
    out.push_back('(');
    if (clause.literals.empty()) {
      out += "TRUE";
    } else {
      for (std::size_t li = 0; li < clause.literals.size(); ++li) {
        if (li) out += " AND ";
        out += literal_text(rule, clause.literals[li]);
      }
    }
    out.push_back(')');
  }
  return out;
}

// Cursor over one line; every failure names origin:line:column.
class LineLexer {
 public:
  LineLexer(const std::string& origin, int line_no, std::string_view text,
            std::size_t pos = 0)
      : origin_(origin), line_no_(line_no), text_(text), pos_(pos) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(origin_ + ":" + std::to_string(line_no_) + ":" +
                     std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_spaces() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  bool at_end() {
    skip_spaces();
    return pos_ >= text_.size();
  }

  // Next character after space skipping, '\0' at end of line.
  char peek() {
    skip_spaces();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void advance() { ++pos_; }

  void consume(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool try_consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  std::string read_word(const char* what) {
    skip_spaces();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail(std::string("expected ") + what);
    return std::string(text_.substr(start, pos_ - start));
  }

  // Bare word or double-quoted string; \" and \\ are the only escapes.
  std::string read_name() {
    if (peek() != '"') return read_word("a name");
    ++pos_;
    std::string out;
    for (;;) {
      if (pos_ >= text_.size()) fail("unterminated quoted name");
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        const char e = text_[pos_++];
        if (e != '"' && e != '\\') fail("unsupported escape in quoted name");
        out.push_back(e);
      } else {
        out.push_back(c);
      }
    }
  }

  double read_number() {
    skip_spaces();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      ++pos_;
    }
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
    const auto v = parse_double(text_.substr(start, pos_ - start));
    if (!v) {
      pos_ = start;
      fail("expected a number");
    }
    return *v;
  }

  std::vector<double> read_number_list() {
    std::vector<double> out;
    out.push_back(read_number());
    while (try_consume(',')) out.push_back(read_number());
    return out;
  }

  int read_rule_id() {
    skip_spaces();
    const std::size_t start = pos_;
    const std::string word = read_word("a rule id");
    const auto v = parse_int(word);
    if (!v || *v < INT_MIN || *v > INT_MAX) {
      pos_ = start;
      fail("expected an integer rule id");
    }
    return static_cast<int>(*v);
  }

 private:
  const std::string& origin_;
  int line_no_;
  std::string_view text_;
  std::size_t pos_;
};

// Conditions discovered so far for one rule, keyed by feature, form, and
// exact threshold bits so an identical literal reuses its patch bit.
struct RuleBuild {
  std::vector<Condition> conditions;
  std::map<std::tuple<std::string, int, std::uint64_t>, int> bit_of;
};

void add_literal(LineLexer& lex, logic::Clause& clause, RuleBuild& build,
                 const Condition& cond, bool positive) {
  const auto key = std::make_tuple(cond.feature, static_cast<int>(cond.form),
                                   std::bit_cast<std::uint64_t>(cond.threshold));
  int bit;
  const auto it = build.bit_of.find(key);
  if (it != build.bit_of.end()) {
    bit = it->second;
  } else {
    if (build.conditions.size() >= 256) {
      lex.fail("more than 256 distinct conditions in one rule");
    }
    bit = static_cast<int>(build.conditions.size());
    build.conditions.push_back(cond);
    build.bit_of.emplace(key, bit);
  }
  for (const logic::Literal& prev : clause.literals) {
    if (static_cast<int>(prev.bit) == bit) {
      if (prev.positive == positive) return;
      lex.fail("contradictory literals on '" + cond.feature + "'");
    }
    if (!cond.feature.empty() &&
        build.conditions[prev.bit].feature == cond.feature) {
      lex.fail("feature '" + cond.feature + "' bound twice in a clause");
    }
  }
  clause.literals.push_back(
      {static_cast<std::uint8_t>(bit), positive});
}

void parse_literal(LineLexer& lex, logic::Clause& clause, RuleBuild& build,
                   const data::FeatureSchema& schema) {
  bool positive = true;
  std::string name;
  for (;;) {
    if (lex.peek() == '"') {
      name = lex.read_name();
      break;
    }
    const std::string word = lex.read_word("a condition");
    if (word == "NOT") {
      positive = !positive;
      continue;
    }
    if (word == "TRUE" || word == "FALSE") {
      Condition cond;
      cond.column = -1;
      cond.form = word == "TRUE" ? ConditionForm::ConstTrue
                                 : ConditionForm::ConstFalse;
      add_literal(lex, clause, build, cond, positive);
      return;
    }
    name = word;
    break;
  }
  Condition cond;
  cond.feature = name;
  const char op = lex.peek();
  if (op == '>' || op == '<') {
    lex.advance();
    const bool or_equal = lex.try_consume('=');
    cond.threshold = lex.read_number();
    if (or_equal) positive = !positive;
    // > and <= bind GreaterThan; < and >= bind LessThan.
    cond.form = (op == '>') == !or_equal ? ConditionForm::GreaterThan
                                         : ConditionForm::LessThan;
  } else {
    cond.form = ConditionForm::IsTrue;
  }
  cond.column = schema.column_index(name);
  if (cond.column < 0) lex.fail("unknown feature '" + name + "'");
  add_literal(lex, clause, build, cond, positive);
}

void parse_clauses(LineLexer& lex, RuleBuild& build, logic::Dnf& dnf,
                   const data::FeatureSchema& schema) {
  for (;;) {
    lex.consume('(');
    logic::Clause clause;
    for (;;) {
      parse_literal(lex, clause, build, schema);
      if (lex.try_consume(')')) break;
      const std::string word = lex.read_word("AND or ')'");
      if (word != "AND") lex.fail("expected AND or ')'");
    }
    dnf.clauses.push_back(std::move(clause));
    if (lex.at_end()) return;
    const std::string word = lex.read_word("OR");
    if (word != "OR") lex.fail("expected OR");
  }
}

}  // namespace

std::string rules_to_text(const RuleSet& rs) {
  rs.validate();
  std::string out;
  out += "# ttnet-rules v1\n";
  out += "# provenance: ";
  out += provenance_name(rs.provenance);
  out.push_back('\n');
  out += "# task: ";
  out += data::task_name(rs.task);
  out.push_back('\n');
  if (!rs.class_labels.empty()) {
    out += "# classes: ";
    for (std::size_t i = 0; i < rs.class_labels.size(); ++i) {
      if (i) out.push_back(',');
      out += quote_name(rs.class_labels[i]);
    }
    out.push_back('\n');
  }
  if (rs.task == data::Task::Regression) {
    out += "# target_affine: " + format_double(rs.target_affine.mean) + "," +
           format_double(rs.target_affine.sd) + "\n";
  }
  out += "# seed: " + std::to_string(rs.seed) + "\n";
  if (!rs.config_digest.empty()) out += "# digest: " + rs.config_digest + "\n";
  out += "BIAS " + join_numbers(rs.bias) + "\n";
  for (const Rule& rule : rs.rules) {
    out += "RULE " + std::to_string(rule.rule_id) + " WEIGHTS " +
           join_numbers(rule.weights) + " : " + dnf_text(rule) + "\n";
  }
  return out;
}

RuleSet parse_rules(std::string_view text, const data::FeatureSchema& schema,
                    const std::string& origin) {
  schema.validate();
  RuleSet rs;
  rs.schema = schema;
  std::optional<std::vector<double>> bias;
  std::optional<std::size_t> num_weights;
  std::set<int> seen_ids;
  bool saw_provenance = false;
  bool saw_task = false;
  bool saw_classes = false;
  bool saw_affine = false;
  int classes_line = 0;

  int line_no = 0;
  std::size_t cursor = 0;
  while (cursor <= text.size()) {
    std::size_t eol = text.find('\n', cursor);
    if (eol == std::string_view::npos) {
      if (cursor == text.size()) break;
      eol = text.size();
    }
    std::string_view line = text.substr(cursor, eol - cursor);
    cursor = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view stripped = trim(line);
    if (stripped.empty()) continue;

    if (stripped.front() == '#') {
      const std::size_t hash = line.find('#');
      const std::size_t colon = line.find(':', hash + 1);
      if (colon == std::string_view::npos) continue;
      const std::string_view key = trim(line.substr(hash + 1, colon - hash - 1));
      LineLexer lex(origin, line_no, line, colon + 1);
      if (key == "provenance") {
        if (saw_provenance) lex.fail("duplicate provenance header");
        saw_provenance = true;
        const std::string_view value = trim(line.substr(colon + 1));
        try {
          rs.provenance = provenance_from_name(value);
        } catch (const Error&) {
          lex.fail("unknown provenance '" + std::string(value) + "'");
        }
      } else if (key == "task") {
        if (saw_task) lex.fail("duplicate task header");
        saw_task = true;
        const std::string_view value = trim(line.substr(colon + 1));
        try {
          rs.task = data::task_from_name(value);
        } catch (const Error&) {
          lex.fail("unknown task '" + std::string(value) + "'");
        }
      } else if (key == "classes") {
        if (saw_classes) lex.fail("duplicate classes header");
        saw_classes = true;
        classes_line = line_no;
        rs.class_labels.push_back(lex.read_name());
        while (lex.try_consume(',')) rs.class_labels.push_back(lex.read_name());
        if (!lex.at_end()) lex.fail("trailing input after class labels");
      } else if (key == "target_affine") {
        if (saw_affine) lex.fail("duplicate target_affine header");
        saw_affine = true;
        rs.target_affine.mean = lex.read_number();
        lex.consume(',');
        rs.target_affine.sd = lex.read_number();
        if (!lex.at_end()) lex.fail("trailing input after target_affine");
      } else if (key == "seed") {
        const std::string_view value = trim(line.substr(colon + 1));
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(
            value.data(), value.data() + value.size(), seed);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
          lex.fail("seed is not an unsigned integer");
        }
        rs.seed = seed;
      } else if (key == "digest") {
        rs.config_digest = std::string(trim(line.substr(colon + 1)));
      }
      continue;
    }

    LineLexer lex(origin, line_no, line);
    const std::string head = lex.read_word("RULE or BIAS");
    if (head == "BIAS") {
      if (bias) lex.fail("duplicate BIAS line");
      std::vector<double> values = lex.read_number_list();
      if (!lex.at_end()) lex.fail("trailing input after BIAS");
      if (num_weights && values.size() != *num_weights) {
        lex.fail("BIAS carries " + std::to_string(values.size()) +
                 " values, rules carry " + std::to_string(*num_weights));
      }
      num_weights = values.size();
      bias = std::move(values);
    } else if (head == "RULE") {
      Rule rule;
      rule.rule_id = lex.read_rule_id();
      if (!seen_ids.insert(rule.rule_id).second) {
        lex.fail("duplicate rule id " + std::to_string(rule.rule_id));
      }
      const std::string kw = lex.read_word("WEIGHTS");
      if (kw != "WEIGHTS") lex.fail("expected WEIGHTS");
      rule.weights = lex.read_number_list();
      if (num_weights && rule.weights.size() != *num_weights) {
        lex.fail("rule carries " + std::to_string(rule.weights.size()) +
                 " weights, earlier lines carry " +
                 std::to_string(*num_weights));
      }
      num_weights = rule.weights.size();
      if (rule.all_weights_zero()) lex.fail("rule has all-zero weights");
      lex.consume(':');
      RuleBuild build;
      parse_clauses(lex, build, rule.dnf, schema);
      rule.dnf.num_bits = static_cast<int>(build.conditions.size());
      rule.dnf.normalize();
      rule.conditions = std::move(build.conditions);
      rs.rules.push_back(std::move(rule));
    } else {
      lex.fail("expected RULE or BIAS");
    }
  }

  if (rs.rules.empty() && !bias) {
    throw ParseError(origin + ": no rules or BIAS line in input");
  }
  if (!num_weights) {
    num_weights = !rs.class_labels.empty()
                      ? rs.class_labels.size()
                      : (rs.task == data::Task::Regression ? 1 : 2);
  }
  rs.num_classes = *num_weights;
  if (rs.task == data::Task::Binary && rs.num_classes != 2) {
    throw ParseError(origin + ": binary rule sets carry two weights per rule");
  }
  if (rs.task == data::Task::Regression && rs.num_classes != 1) {
    throw ParseError(origin + ": regression rule sets carry one weight per rule");
  }
  if (rs.task == data::Task::Multiclass && rs.num_classes < 2) {
    throw ParseError(origin + ": multiclass rule sets carry at least two weights");
  }
  if (!rs.class_labels.empty() && rs.class_labels.size() != rs.num_classes) {
    throw ParseError(origin + ":" + std::to_string(classes_line) +
                     ":1: class label count does not match weight count");
  }
  rs.bias = bias ? std::move(*bias) : std::vector<double>(rs.num_classes, 0.0);
  rs.validate();
  return rs;
}

void save_rules_text(const RuleSet& rs, const std::string& path) {
  write_file(path, rules_to_text(rs));
}

RuleSet load_rules_text(const std::string& path,
                        const data::FeatureSchema& schema) {
  return parse_rules(read_file(path), schema, path);
}

}  // namespace ttr::rules
