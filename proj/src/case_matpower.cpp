// Reader for the subset of MATPOWER case files used here: baseMVA plus the
// bus, branch, gen and gencost matrices. Anything else is an error.

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "case_checks.hpp"
#include "gridctrl/errors.hpp"
#include "gridctrl/network.hpp"

namespace gridctrl::detail {

namespace {

struct Cell {
  double value;
  int line;
  int column;
};

struct Matrix {
  std::vector<std::vector<Cell>> rows;
  int line = 0;
};

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_blank(true);
    return pos_ >= text_.size();
  }

  // Skips spaces, tabs, comments and (optionally) newlines.
  void skip_blank(bool newlines) {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        advance();
      } else if (c == '.' && text_.substr(pos_, 3) == "...") {
        // MATLAB line continuation
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        if (pos_ < text_.size()) advance();
      } else {
        break;
      }
    }
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_blank(true);
    if (peek() != c) fail(fmt::format("expected '{}'", c));
    advance();
  }

  std::string identifier() {
    skip_blank(true);
    std::string out;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.')) {
      out.push_back(peek());
      advance();
    }
    if (out.empty()) fail("expected an identifier");
    return out;
  }

  std::optional<double> number() {
    std::size_t end = pos_;
    while (end < text_.size()) {
      char c = text_[end];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E') {
        ++end;
      } else {
        break;
      }
    }
    if (end == pos_) return std::nullopt;
    double value = 0.0;
    auto token = text_.substr(pos_, end - pos_);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) fail(fmt::format("malformed number '{}'", token));
    while (pos_ < end) advance();
    return value;
  }

  std::string quoted() {
    skip_blank(true);
    if (peek() != '\'') fail("expected a quoted string");
    advance();
    std::string out;
    while (pos_ < text_.size() && peek() != '\'' && peek() != '\n') {
      out.push_back(peek());
      advance();
    }
    if (peek() != '\'') fail("unterminated string");
    advance();
    return out;
  }

  // Everything up to the end of the current line (used for `function`).
  void rest_of_line() {
    while (pos_ < text_.size() && peek() != '\n') advance();
  }

  Matrix matrix() {
    Matrix m;
    m.line = line_;
    expect('[');
    std::vector<Cell> row;
    auto flush = [&] {
      if (!row.empty()) m.rows.push_back(std::move(row));
      row.clear();
    };
    while (true) {
      skip_blank(false);
      char c = peek();
      if (c == '\0') fail("unterminated matrix");
      if (c == ']') {
        advance();
        break;
      }
      if (c == ';' || c == '\n') {
        advance();
        flush();
        continue;
      }
      if (c == ',') {
        advance();
        continue;
      }
      int l = line_, col = column_;
      auto v = number();
      if (!v) fail(fmt::format("unexpected character '{}' in matrix", c));
      row.push_back({*v, l, col});
    }
    flush();
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

void require_columns(const Matrix& m, std::size_t n, const char* block) {
  for (const auto& row : m.rows) {
    if (row.size() < n) {
      throw ParseError(fmt::format("mpc.{} row has {} columns, need at least {}", block, row.size(), n), row.front().line, row.front().column);
    }
  }
}

int as_int(const Cell& c, const char* what) {
  if (c.value != std::floor(c.value)) throw ParseError(fmt::format("{} must be an integer", what), c.line, c.column);
  return static_cast<int>(c.value);
}

}  // namespace

Network parse_matpower_case(std::string_view text) {
  Scanner scan(text);
  std::optional<double> base_mva;
  std::map<std::string, Matrix> blocks;

  while (!scan.at_end()) {
    int stmt_line = scan.line(), stmt_col = scan.column();
    std::string name = scan.identifier();
    if (name == "function") {
      scan.rest_of_line();
      continue;
    }
    if (name.rfind("mpc.", 0) != 0) throw ParseError(fmt::format("unexpected statement '{}'", name), stmt_line, stmt_col);
    std::string key = name.substr(4);
    scan.expect('=');
    if (key == "version") {
      std::string version = scan.quoted();
      if (version != "2") throw ParseError(fmt::format("unsupported case version '{}'", version), stmt_line, stmt_col);
    } else if (key == "baseMVA") {
      scan.skip_blank(true);
      auto v = scan.number();
      if (!v) scan.fail("expected a number for baseMVA");
      base_mva = *v;
    } else if (key == "bus" || key == "branch" || key == "gen" || key == "gencost") {
      if (blocks.count(key)) throw ParseError(fmt::format("mpc.{} given twice", key), stmt_line, stmt_col);
      blocks[key] = scan.matrix();
    } else {
      throw ParseError(fmt::format("unsupported block mpc.{}", key), stmt_line, stmt_col);
    }
    scan.skip_blank(false);
    if (scan.peek() == ';') scan.expect(';');
  }

  if (!base_mva) throw ParseError("missing mpc.baseMVA", scan.line(), scan.column());
  for (const char* required : {"bus", "branch"}) {
    if (!blocks.count(required)) throw ParseError(fmt::format("missing mpc.{}", required), scan.line(), scan.column());
  }

  Network net;
  net.base_mva = *base_mva;
  if (!(net.base_mva > 0.0)) throw InputError("baseMVA must be positive");

  const Matrix& bus = blocks["bus"];
  require_columns(bus, 3, "bus");
  for (const auto& row : bus.rows) {
    int id = as_int(row[0], "bus id");
    int type = as_int(row[1], "bus type");
    if (type < 1 || type > 3) throw ParseError(fmt::format("bus {} has unsupported type {}", id, type), row[1].line, row[1].column);
    if (row.size() > 4 && row[4].value != 0.0) throw ParseError(fmt::format("bus {} has a shunt conductance (unsupported)", id), row[4].line, row[4].column);
    net.buses.push_back({id, type == 3});
    if (row[2].value != 0.0) net.loads.push_back({id, row[2].value});
  }

  const Matrix& branch = blocks["branch"];
  require_columns(branch, 4, "branch");
  int line_id = 0;
  for (const auto& row : branch.rows) {
    Line line;
    line.id = ++line_id;
    line.from_bus = as_int(row[0], "branch from bus");
    line.to_bus = as_int(row[1], "branch to bus");
    line.reactance = row[3].value;
    if (row.size() > 5 && row[5].value != 0.0) line.limit = row[5].value;
    if (row.size() > 8 && row[8].value != 0.0 && row[8].value != 1.0) {
      throw ParseError(fmt::format("branch {} has an off-nominal tap ratio (unsupported)", line.id), row[8].line, row[8].column);
    }
    if (row.size() > 9 && row[9].value != 0.0) {
      throw ParseError(fmt::format("branch {} has a phase shift (unsupported)", line.id), row[9].line, row[9].column);
    }
    if (row.size() > 10) line.in_service = row[10].value != 0.0;
    net.lines.push_back(line);
  }

  if (blocks.count("gen")) {
    const Matrix& gen = blocks["gen"];
    require_columns(gen, 10, "gen");
    const Matrix* cost = blocks.count("gencost") ? &blocks["gencost"] : nullptr;
    if (cost && cost->rows.size() != gen.rows.size()) {
      throw ParseError(fmt::format("mpc.gencost has {} rows for {} generators", cost->rows.size(), gen.rows.size()), cost->line, 1);
    }
    for (std::size_t g = 0; g < gen.rows.size(); ++g) {
      const auto& row = gen.rows[g];
      if (row[7].value == 0.0) continue;  // out of service
      Generator out;
      out.bus = as_int(row[0], "gen bus");
      out.p_max = row[8].value;
      out.p_min = row[9].value;
      if (cost) {
        const auto& c = cost->rows[g];
        if (c.size() < 4) throw ParseError("mpc.gencost row too short", c.front().line, c.front().column);
        if (as_int(c[0], "gencost model") != 2) throw ParseError("only polynomial gencost (model 2) is supported", c[0].line, c[0].column);
        int n = as_int(c[3], "gencost coefficient count");
        if (n < 0 || n > 3) throw ParseError("gencost supports at most quadratic polynomials", c[3].line, c[3].column);
        if (c.size() < static_cast<std::size_t>(4 + n)) throw ParseError("mpc.gencost row has fewer coefficients than declared", c[3].line, c[3].column);
        for (int k = 0; k < n; ++k) out.cost[n - 1 - k] = c[4 + k].value;
      }
      net.generators.push_back(out);
    }
  } else if (blocks.count("gencost")) {
    throw ParseError("mpc.gencost without mpc.gen", blocks["gencost"].line, 1);
  }

  check_parsed(net);
  return net;
}

}  // namespace gridctrl::detail

namespace gridctrl {

Network parse_case(std::string_view text, CaseFormat format) {
  return format == CaseFormat::Json ? detail::parse_json_case(text) : detail::parse_matpower_case(text);
}

}  // namespace gridctrl
