#include "droneroute/lp.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace droneroute {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string var_x(int k, int i, int j) {
  return "x_" + std::to_string(k) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

std::string var_u(int k, int i) {
  return "u_" + std::to_string(k) + "_" + std::to_string(i);
}

}  // namespace

LpModel build_lp(const ProblemInstance& inst) {
  const TransformedNetwork& net = inst.net;
  const int n = net.node_count();
  const int depot = inst.depot;

  std::vector<std::pair<int, int>> arcs;  // directed, lexicographic
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && net.adjacent(i, j)) arcs.emplace_back(i, j);

  LpModel m;
  for (int k = 1; k <= inst.K; ++k)
    for (const auto& [i, j] : arcs)
      if (net.is_value[i]) m.objective.push_back({net.value[i], var_x(k, i, j)});

  // Each value node is departed at most once across the fleet.
  for (int p = net.original_count; p < n; ++p) {
    LpConstraint c;
    c.name = "visit_" + std::to_string(p);
    for (int k = 1; k <= inst.K; ++k)
      for (const auto& [i, j] : arcs)
        if (i == p) c.lhs.push_back({1.0, var_x(k, i, j)});
    c.rel = '<';
    c.rhs = 1.0;
    m.constraints.push_back(std::move(c));
  }

  // Flow conservation per drone and node.
  for (int k = 1; k <= inst.K; ++k) {
    for (int i = 0; i < n; ++i) {
      LpConstraint c;
      c.name = "flow_" + std::to_string(k) + "_" + std::to_string(i);
      for (const auto& [a, b] : arcs) {
        if (b == i) c.lhs.push_back({1.0, var_x(k, a, b)});
        if (a == i) c.lhs.push_back({-1.0, var_x(k, a, b)});
      }
      c.rel = '=';
      c.rhs = 0.0;
      m.constraints.push_back(std::move(c));
    }
  }

  // Every drone leaves and re-enters the depot exactly once.
  for (int k = 1; k <= inst.K; ++k) {
    LpConstraint out, in;
    out.name = "depart_" + std::to_string(k);
    in.name = "return_" + std::to_string(k);
    for (const auto& [i, j] : arcs) {
      if (i == depot) out.lhs.push_back({1.0, var_x(k, i, j)});
      if (j == depot) in.lhs.push_back({1.0, var_x(k, i, j)});
    }
    out.rel = in.rel = '=';
    out.rhs = in.rhs = 1.0;
    m.constraints.push_back(std::move(out));
    m.constraints.push_back(std::move(in));
  }

  // Travel-time caps: battery and assessment deadline per drone.
  for (int k = 1; k <= inst.K; ++k) {
    LpConstraint bat;
    bat.name = "battery_" + std::to_string(k);
    for (const auto& [i, j] : arcs)
      bat.lhs.push_back({dist(net.coords[i], net.coords[j]), var_x(k, i, j)});
    bat.rel = '<';
    bat.rhs = inst.Q;
    LpConstraint dur = bat;
    dur.name = "duration_" + std::to_string(k);
    dur.rhs = inst.p_max;
    m.constraints.push_back(std::move(bat));
    m.constraints.push_back(std::move(dur));
  }

  // Node-ordering cycle cuts on non-depot arcs: u_i - u_j + M x_ij <= M - 1.
  const double big_m = static_cast<double>(n);
  for (int k = 1; k <= inst.K; ++k) {
    for (const auto& [i, j] : arcs) {
      if (i == depot || j == depot) continue;
      LpConstraint c;
      c.name = "order_" + std::to_string(k) + "_" + std::to_string(i) + "_" + std::to_string(j);
      c.lhs.push_back({1.0, var_u(k, i)});
      c.lhs.push_back({-1.0, var_u(k, j)});
      c.lhs.push_back({big_m, var_x(k, i, j)});
      c.rel = '<';
      c.rhs = big_m - 1.0;
      m.constraints.push_back(std::move(c));
    }
  }

  for (int k = 1; k <= inst.K; ++k)
    for (int i = 0; i < n; ++i) m.bounds.push_back({var_u(k, i), 1.0, static_cast<double>(n)});

  for (int k = 1; k <= inst.K; ++k)
    for (const auto& [i, j] : arcs) m.binaries.push_back(var_x(k, i, j));
  for (int k = 1; k <= inst.K; ++k)
    for (int i = 0; i < n; ++i) m.generals.push_back(var_u(k, i));

  return m;
}

namespace {

void append_wrapped(std::string& out, std::string& line, const std::string& piece) {
  if (line.size() + piece.size() > 200) {
    out += line;
    out += '\n';
    line = " ";
  }
  line += piece;
}

void render_terms(std::string& out, std::string& line, const std::vector<LpTerm>& terms) {
  for (size_t i = 0; i < terms.size(); ++i) {
    const LpTerm& t = terms[i];
    const double mag = std::abs(t.coeff);
    std::string piece = i == 0 ? (t.coeff < 0 ? "- " : "") : (t.coeff < 0 ? " - " : " + ");
    if (mag != 1.0) piece += fmt_num(mag) + " ";
    piece += t.var;
    append_wrapped(out, line, piece);
  }
}

}  // namespace

std::string render_lp(const LpModel& m) {
  std::string out;
  out += m.maximize ? "Maximize\n" : "Minimize\n";
  {
    std::string line = " " + m.objective_name + ":";
    if (!m.objective.empty()) {
      line += " ";
      render_terms(out, line, m.objective);
    }
    out += line;
    out += '\n';
  }
  out += "Subject To\n";
  for (const LpConstraint& c : m.constraints) {
    std::string line = " " + c.name + ": ";
    render_terms(out, line, c.lhs);
    const char* rel = c.rel == '<' ? " <= " : (c.rel == '>' ? " >= " : " = ");
    append_wrapped(out, line, rel + fmt_num(c.rhs));
    out += line;
    out += '\n';
  }
  if (!m.bounds.empty()) {
    out += "Bounds\n";
    for (const LpBound& b : m.bounds)
      out += " " + fmt_num(b.lo) + " <= " + b.var + " <= " + fmt_num(b.hi) + "\n";
  }
  if (!m.binaries.empty()) {
    out += "Binaries\n";
    std::string line = " ";
    for (const std::string& v : m.binaries) {
      if (line.size() > 1 && line.size() + v.size() + 1 > 200) {
        out += line;
        out += '\n';
        line = " ";
      }
      if (line.size() > 1) line += " ";
      line += v;
    }
    out += line;
    out += '\n';
  }
  if (!m.generals.empty()) {
    out += "Generals\n";
    std::string line = " ";
    for (const std::string& v : m.generals) {
      if (line.size() > 1 && line.size() + v.size() + 1 > 200) {
        out += line;
        out += '\n';
        line = " ";
      }
      if (line.size() > 1) line += " ";
      line += v;
    }
    out += line;
    out += '\n';
  }
  out += "End\n";
  return out;
}

namespace {

struct Token {
  enum Kind { word, number, plus, minus, rel_le, rel_ge, rel_eq, colon, eof } kind;
  std::string text;
  double num = 0.0;
  int line = 0;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> toks;
  int line = 1;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\\') {  // comment to end of line
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '+') {
      toks.push_back({Token::plus, "+", 0, line});
      ++i;
      continue;
    }
    if (c == '-') {
      toks.push_back({Token::minus, "-", 0, line});
      ++i;
      continue;
    }
    if (c == ':') {
      toks.push_back({Token::colon, ":", 0, line});
      ++i;
      continue;
    }
    if (c == '<' || c == '>' || c == '=') {
      size_t j = i;
      while (j < n && (text[j] == '<' || text[j] == '>' || text[j] == '=')) ++j;
      const std::string op = text.substr(i, j - i);
      if (op == "<" || op == "<=" || op == "=<")
        toks.push_back({Token::rel_le, op, 0, line});
      else if (op == ">" || op == ">=" || op == "=>")
        toks.push_back({Token::rel_ge, op, 0, line});
      else if (op == "=")
        toks.push_back({Token::rel_eq, op, 0, line});
      else
        throw std::invalid_argument("lp parse: bad relation '" + op + "' at line " +
                                    std::to_string(line));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
                       text[j] == 'e' || text[j] == 'E' ||
                       ((text[j] == '+' || text[j] == '-') && j > i &&
                        (text[j - 1] == 'e' || text[j - 1] == 'E'))))
        ++j;
      double v = 0.0;
      const auto res = std::from_chars(text.data() + i, text.data() + j, v);
      if (res.ec != std::errc() || res.ptr != text.data() + j)
        throw std::invalid_argument("lp parse: bad number at line " + std::to_string(line));
      toks.push_back({Token::number, text.substr(i, j - i), v, line});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                       text[j] == '.'))
        ++j;
      toks.push_back({Token::word, text.substr(i, j - i), 0, line});
      i = j;
      continue;
    }
    throw std::invalid_argument(std::string("lp parse: unexpected character '") + c +
                                "' at line " + std::to_string(line));
  }
  toks.push_back({Token::eof, "", 0, line});
  return toks;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  Token take() { return toks[pos++]; }

  bool at_keyword(const std::string& kw) const {
    return peek().kind == Token::word && lower(peek().text) == kw;
  }

  bool at_section() const {
    if (peek().kind != Token::word) return peek().kind == Token::eof;
    const std::string w = lower(peek().text);
    return w == "subject" || w == "st" || w == "s.t." || w == "bounds" || w == "binaries" ||
           w == "binary" || w == "bin" || w == "generals" || w == "general" || w == "gen" ||
           w == "end" || w == "maximize" || w == "minimize" || w == "max" || w == "min";
  }

  // sign* [number] [word]; at least one of number/word present
  bool parse_term(std::vector<LpTerm>& terms, bool first) {
    double sign = 1.0;
    bool saw_sign = false;
    while (peek().kind == Token::plus || peek().kind == Token::minus) {
      if (take().kind == Token::minus) sign = -sign;
      saw_sign = true;
    }
    if (!first && !saw_sign) return false;
    if (peek().kind == Token::number) {
      const double v = take().num;
      if (peek().kind == Token::word && !at_section()) {
        terms.push_back({sign * v, take().text});
      } else {
        terms.push_back({sign * v, ""});  // bare constant
      }
      return true;
    }
    if (peek().kind == Token::word && !at_section()) {
      terms.push_back({sign, take().text});
      return true;
    }
    if (saw_sign)
      throw std::invalid_argument("lp parse: dangling sign at line " +
                                  std::to_string(peek().line));
    return false;
  }

  std::vector<LpTerm> parse_expr() {
    std::vector<LpTerm> terms;
    bool first = true;
    while (peek().kind != Token::eof && peek().kind != Token::rel_le &&
           peek().kind != Token::rel_ge && peek().kind != Token::rel_eq) {
      if (at_section() && !first) break;
      if (!parse_term(terms, first)) break;
      first = false;
    }
    return terms;
  }
};

}  // namespace

LpModel parse_lp(const std::string& text) {
  Parser p{tokenize(text)};
  LpModel m;
  m.objective_name.clear();

  if (p.peek().kind != Token::word)
    throw std::invalid_argument("lp parse: expected objective sense at line " +
                                std::to_string(p.peek().line));
  {
    const std::string w = lower(p.take().text);
    if (w == "maximize" || w == "max")
      m.maximize = true;
    else if (w == "minimize" || w == "min")
      m.maximize = false;
    else
      throw std::invalid_argument("lp parse: expected Maximize or Minimize, got '" + w + "'");
  }
  if (p.peek().kind == Token::word && p.toks[p.pos + 1].kind == Token::colon) {
    m.objective_name = p.take().text;
    p.take();
  }
  m.objective = p.parse_expr();

  while (p.peek().kind != Token::eof) {
    if (!p.at_section())
      throw std::invalid_argument("lp parse: expected section keyword at line " +
                                  std::to_string(p.peek().line));
    const std::string section = lower(p.take().text);
    if (section == "end") break;
    if (section == "subject" || section == "st" || section == "s.t.") {
      if (section == "subject") {
        if (!p.at_keyword("to"))
          throw std::invalid_argument("lp parse: expected 'To' after 'Subject'");
        p.take();
      }
      while (p.peek().kind != Token::eof && !p.at_section()) {
        LpConstraint c;
        if (p.peek().kind == Token::word && p.toks[p.pos + 1].kind == Token::colon) {
          c.name = p.take().text;
          p.take();
        }
        c.lhs = p.parse_expr();
        const Token rel = p.take();
        if (rel.kind == Token::rel_le)
          c.rel = '<';
        else if (rel.kind == Token::rel_ge)
          c.rel = '>';
        else if (rel.kind == Token::rel_eq)
          c.rel = '=';
        else
          throw std::invalid_argument("lp parse: expected relation at line " +
                                      std::to_string(rel.line));
        double sign = 1.0;
        while (p.peek().kind == Token::plus || p.peek().kind == Token::minus)
          if (p.take().kind == Token::minus) sign = -sign;
        if (p.peek().kind != Token::number)
          throw std::invalid_argument("lp parse: expected rhs number at line " +
                                      std::to_string(p.peek().line));
        c.rhs = sign * p.take().num;
        m.constraints.push_back(std::move(c));
      }
    } else if (section == "bounds") {
      while (p.peek().kind != Token::eof && !p.at_section()) {
        double sign = 1.0;
        while (p.peek().kind == Token::minus || p.peek().kind == Token::plus)
          if (p.take().kind == Token::minus) sign = -sign;
        if (p.peek().kind == Token::number) {
          const double lo = sign * p.take().num;
          if (p.take().kind != Token::rel_le)
            throw std::invalid_argument("lp parse: expected <= in bound");
          if (p.peek().kind != Token::word)
            throw std::invalid_argument("lp parse: expected variable in bound");
          const std::string var = p.take().text;
          if (p.take().kind != Token::rel_le)
            throw std::invalid_argument("lp parse: expected <= in bound");
          double s2 = 1.0;
          while (p.peek().kind == Token::minus || p.peek().kind == Token::plus)
            if (p.take().kind == Token::minus) s2 = -s2;
          if (p.peek().kind != Token::number)
            throw std::invalid_argument("lp parse: expected upper bound number");
          m.bounds.push_back({var, lo, s2 * p.take().num});
        } else if (p.peek().kind == Token::word) {
          const std::string var = p.take().text;
          if (p.at_keyword("free")) {
            p.take();
            m.bounds.push_back({var, -1e30, 1e30});
            continue;
          }
          const Token rel = p.take();
          double s2 = 1.0;
          while (p.peek().kind == Token::minus || p.peek().kind == Token::plus)
            if (p.take().kind == Token::minus) s2 = -s2;
          if (p.peek().kind != Token::number)
            throw std::invalid_argument("lp parse: expected bound number");
          const double v = s2 * p.take().num;
          if (rel.kind == Token::rel_le)
            m.bounds.push_back({var, -1e30, v});
          else if (rel.kind == Token::rel_ge)
            m.bounds.push_back({var, v, 1e30});
          else
            m.bounds.push_back({var, v, v});
        } else {
          throw std::invalid_argument("lp parse: bad bound at line " +
                                      std::to_string(p.peek().line));
        }
      }
    } else if (section == "binaries" || section == "binary" || section == "bin") {
      while (p.peek().kind == Token::word && !p.at_section()) m.binaries.push_back(p.take().text);
    } else if (section == "generals" || section == "general" || section == "gen") {
      while (p.peek().kind == Token::word && !p.at_section()) m.generals.push_back(p.take().text);
    } else {
      throw std::invalid_argument("lp parse: unsupported section '" + section + "'");
    }
  }
  return m;
}

}  // namespace droneroute
