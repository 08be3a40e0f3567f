#include "odmr/seqlang.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace odmr::seq {

namespace {

struct Token {
  std::string text;
  int col = 0;
};

std::vector<Token> tokenize_line(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;  // comment to end of line
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#')
      ++i;
    out.push_back({std::string(line.substr(start, i - start)), int(start) + 1});
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

bool valid_name(const std::string& s) {
  if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run() {
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text_.size()) {
      size_t nl = text_.find('\n', pos);
      std::string_view line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                             : nl - pos);
      ++line_no;
      parse_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    finish(line_no);
    ParseResult r;
    r.diagnostics = std::move(diags_);
    if (r.diagnostics.empty()) r.ast = std::move(ast_);
    return r;
  }

 private:
  void error(SourcePos p, std::string msg) { diags_.push_back({p, std::move(msg)}); }

  // require a positional numeric argument; returns false after reporting
  bool need_number(const std::vector<Token>& t, size_t idx, int line, const char* what,
                   double& out) {
    if (idx >= t.size()) {
      error({line, t.empty() ? 1 : t.back().col}, std::string("missing ") + what);
      return false;
    }
    if (!parse_double(t[idx].text, out)) {
      error({line, t[idx].col}, std::string("expected a number for ") + what + ", got '" +
                                    t[idx].text + "'");
      return false;
    }
    return true;
  }

  bool need_nonneg(const std::vector<Token>& t, size_t idx, int line, const char* what,
                   double& out) {
    if (!need_number(t, idx, line, what, out)) return false;
    if (out < 0.0) {
      error({line, t[idx].col}, std::string(what) + " must be >= 0");
      return false;
    }
    return true;
  }

  void check_extra(const std::vector<Token>& t, size_t next, int line) {
    if (next < t.size())
      error({line, t[next].col}, "unexpected trailing token '" + t[next].text + "'");
  }

  void parse_tone(const std::vector<Token>& t, int line) {
    ToneDecl d;
    d.pos = {line, t[0].col};
    if (t.size() < 2 || !valid_name(t[1].text)) {
      error({line, t.size() > 1 ? t[1].col : t[0].col}, "tone needs a name");
      return;
    }
    d.name = t[1].text;
    size_t i = 2;
    bool have_freq = false, have_rabi = false;
    while (i < t.size()) {
      const std::string& key = t[i].text;
      if (key == "freq") {
        if (!need_number(t, i + 1, line, "freq (MHz)", d.freq_mhz)) return;
        if (d.freq_mhz <= 0.0) {
          error({line, t[i + 1].col}, "tone frequency must be > 0");
          return;
        }
        have_freq = true;
        i += 2;
      } else if (key == "rabi") {
        if (!need_nonneg(t, i + 1, line, "rabi (MHz)", d.rabi_mhz)) return;
        have_rabi = true;
        i += 2;
      } else if (key == "pair") {
        if (i + 1 >= t.size()) {
          error({line, t[i].col}, "pair needs a value (xy, yz or xz)");
          return;
        }
        try {
          d.pair = spin::pair_from_name(t[i + 1].text);
        } catch (const std::invalid_argument& ex) {
          error({line, t[i + 1].col}, ex.what());
          return;
        }
        i += 2;
      } else {
        error({line, t[i].col}, "unknown tone attribute '" + key + "'");
        return;
      }
    }
    if (!have_freq || !have_rabi) {
      error(d.pos, "tone requires 'freq' and 'rabi'");
      return;
    }
    for (const auto& existing : ast_.tones)
      if (existing.name == d.name) {
        error(d.pos, "duplicate tone name '" + d.name + "'");
        return;
      }
    ast_.tones.push_back(std::move(d));
  }

  void parse_mw(const std::vector<Token>& t, int line) {
    MwStmt m;
    if (t.size() < 2 || !valid_name(t[1].text)) {
      error({line, t.size() > 1 ? t[1].col : t[0].col}, "mw needs a tone name");
      return;
    }
    m.tone = t[1].text;
    if (!need_nonneg(t, 2, line, "mw duration (ns)", m.duration_ns)) return;
    size_t i = 3;
    while (i < t.size()) {
      const std::string& key = t[i].text;
      if (key == "phase") {
        if (!need_number(t, i + 1, line, "phase (deg)", m.phase_deg)) return;
        i += 2;
      } else if (key == "detuning") {
        if (!need_number(t, i + 1, line, "detuning (MHz)", m.detuning_mhz)) return;
        i += 2;
      } else {
        error({line, t[i].col}, "unknown mw attribute '" + key + "'");
        return;
      }
    }
    ast_.statements.push_back({m, {line, t[0].col}});
  }

  void parse_sweep(const std::vector<Token>& t, int line) {
    SweepDecl s;
    s.pos = {line, t[0].col};
    if (t.size() < 2) {
      error(s.pos, "sweep needs a parameter path");
      return;
    }
    if (!parse_path(t[1].text, s.path)) {
      error({line, t[1].col}, "bad parameter path '" + t[1].text +
                                  "' (expected kind[index].field, e.g. mw[0].duration)");
      return;
    }
    if (!need_number(t, 2, line, "sweep start", s.start)) return;
    if (!need_number(t, 3, line, "sweep stop", s.stop)) return;
    if (t.size() < 5 || !parse_int(t[4].text, s.steps)) {
      error({line, t.size() > 4 ? t[4].col : t[3].col}, "sweep needs an integer step count");
      return;
    }
    if (s.steps < 1) {
      error({line, t[4].col}, "sweep step count must be >= 1");
      return;
    }
    check_extra(t, 5, line);
    ast_.sweeps.push_back(std::move(s));
  }

  static bool parse_path(const std::string& s, ParamPath& out) {
    size_t lb = s.find('[');
    size_t rb = s.find(']');
    size_t dot = s.find('.', rb == std::string::npos ? 0 : rb);
    if (lb == std::string::npos || rb == std::string::npos || dot == std::string::npos ||
        !(lb < rb && rb + 1 == dot))
      return false;
    out.kind = s.substr(0, lb);
    std::string idx = s.substr(lb + 1, rb - lb - 1);
    if (!parse_int(idx, out.index) || out.index < 0) return false;
    out.field = s.substr(dot + 1);
    return !out.kind.empty() && !out.field.empty();
  }

  void parse_line(std::string_view line, int line_no) {
    auto t = tokenize_line(line);
    if (t.empty()) return;
    const std::string& head = t[0].text;
    if (head == "tone") {
      parse_tone(t, line_no);
    } else if (head == "mw") {
      parse_mw(t, line_no);
    } else if (head == "laser" || head == "wait" || head == "read") {
      double d = 0.0;
      if (!need_nonneg(t, 1, line_no, (head + " duration (us)").c_str(), d)) return;
      check_extra(t, 2, line_no);
      if (head == "laser")
        ast_.statements.push_back({LaserStmt{d}, {line_no, t[0].col}});
      else if (head == "wait")
        ast_.statements.push_back({WaitStmt{d}, {line_no, t[0].col}});
      else
        ast_.statements.push_back({ReadStmt{d}, {line_no, t[0].col}});
    } else if (head == "sweep") {
      parse_sweep(t, line_no);
    } else {
      error({line_no, t[0].col}, "unknown directive '" + head + "'");
    }
  }

  // whole-sequence structure checks
  void finish(int last_line) {
    if (!diags_.empty()) return;  // token-level errors already fatal
    if (ast_.statements.empty()) {
      error({last_line, 1}, "sequence has no statements");
      return;
    }
    if (!std::holds_alternative<LaserStmt>(ast_.statements.front().node))
      error(ast_.statements.front().pos, "sequence must begin with a laser statement");
    if (!std::holds_alternative<ReadStmt>(ast_.statements.back().node))
      error(ast_.statements.back().pos, "sequence must end with a read statement");

    for (const auto& st : ast_.statements) {
      if (const auto* mw = std::get_if<MwStmt>(&st.node)) {
        bool found = false;
        for (const auto& tn : ast_.tones) found = found || tn.name == mw->tone;
        if (!found) error(st.pos, "mw references undeclared tone '" + mw->tone + "'");
      }
    }

    if (ast_.sweeps.size() > 2)
      error(ast_.sweeps[2].pos, "at most two sweep declarations are allowed");
    for (const auto& sw : ast_.sweeps) {
      std::string err = check_path(ast_, sw.path);
      if (!err.empty()) error(sw.pos, err);
    }
  }

 public:
  static std::string check_path(const SequenceAst& ast, const ParamPath& p);

 private:
  std::string_view text_;
  SequenceAst ast_;
  std::vector<Diagnostic> diags_;
};

template <class T>
std::vector<T*> statements_of(SequenceAst& ast) {
  std::vector<T*> out;
  for (auto& st : ast.statements)
    if (auto* s = std::get_if<T>(&st.node)) out.push_back(s);
  return out;
}

// returns pointer to the addressed field, null + error message otherwise
double* resolve(SequenceAst& ast, const ParamPath& p, std::string* err) {
  auto fail = [&](const std::string& m) -> double* {
    if (err) *err = m;
    return nullptr;
  };
  auto pick = [&](auto vec, auto field) -> double* {
    if (p.index >= int(vec.size()))
      return fail("sweep path " + p.str() + ": index out of range (have " +
                  std::to_string(vec.size()) + ")");
    return field(vec[p.index]);
  };
  if (p.kind == "tone") {
    if (p.index >= int(ast.tones.size()))
      return fail("sweep path " + p.str() + ": index out of range (have " +
                  std::to_string(ast.tones.size()) + ")");
    ToneDecl& t = ast.tones[p.index];
    if (p.field == "freq") return &t.freq_mhz;
    if (p.field == "rabi") return &t.rabi_mhz;
    return fail("sweep path " + p.str() + ": tone has no field '" + p.field + "'");
  }
  if (p.kind == "laser") {
    if (p.field != "duration")
      return fail("sweep path " + p.str() + ": laser has no field '" + p.field + "'");
    return pick(statements_of<LaserStmt>(ast), [](LaserStmt* s) { return &s->duration_us; });
  }
  if (p.kind == "wait") {
    if (p.field != "duration")
      return fail("sweep path " + p.str() + ": wait has no field '" + p.field + "'");
    return pick(statements_of<WaitStmt>(ast), [](WaitStmt* s) { return &s->duration_us; });
  }
  if (p.kind == "read") {
    if (p.field != "duration")
      return fail("sweep path " + p.str() + ": read has no field '" + p.field + "'");
    return pick(statements_of<ReadStmt>(ast), [](ReadStmt* s) { return &s->duration_us; });
  }
  if (p.kind == "mw") {
    auto field = [&](MwStmt* s) -> double* {
      if (p.field == "duration") return &s->duration_ns;
      if (p.field == "phase") return &s->phase_deg;
      if (p.field == "detuning") return &s->detuning_mhz;
      return nullptr;
    };
    auto vec = statements_of<MwStmt>(ast);
    if (p.index >= int(vec.size()))
      return fail("sweep path " + p.str() + ": index out of range (have " +
                  std::to_string(vec.size()) + ")");
    double* f = field(vec[p.index]);
    if (!f) return fail("sweep path " + p.str() + ": mw has no field '" + p.field + "'");
    return f;
  }
  return fail("sweep path " + p.str() + ": unknown kind '" + p.kind + "'");
}

std::string Parser::check_path(const SequenceAst& ast, const ParamPath& p) {
  std::string err;
  SequenceAst copy = ast;  // resolve mutates nothing, but takes non-const
  if (!resolve(copy, p, &err)) return err;
  return {};
}

}  // namespace

std::string ParamPath::str() const {
  return kind + "[" + std::to_string(index) + "]." + field;
}

std::vector<double> SweepDecl::values() const {
  std::vector<double> v(static_cast<size_t>(steps));
  if (steps == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < steps; ++i) v[size_t(i)] = start + (stop - start) * double(i) / (steps - 1);
  return v;
}

ParseResult parse(std::string_view text) { return Parser(text).run(); }

std::string print(const SequenceAst& ast) {
  std::ostringstream os;
  for (const auto& t : ast.tones) {
    os << "tone " << t.name << " freq " << fmt_double(t.freq_mhz) << " rabi "
       << fmt_double(t.rabi_mhz);
    if (t.pair) os << " pair " << spin::pair_name(*t.pair);
    os << "\n";
  }
  for (const auto& st : ast.statements) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, LaserStmt>)
            os << "laser " << fmt_double(node.duration_us);
          else if constexpr (std::is_same_v<T, WaitStmt>)
            os << "wait " << fmt_double(node.duration_us);
          else if constexpr (std::is_same_v<T, ReadStmt>)
            os << "read " << fmt_double(node.duration_us);
          else {
            os << "mw " << node.tone << " " << fmt_double(node.duration_ns);
            if (node.phase_deg != 0.0) os << " phase " << fmt_double(node.phase_deg);
            if (node.detuning_mhz != 0.0) os << " detuning " << fmt_double(node.detuning_mhz);
          }
        },
        st.node);
    os << "\n";
  }
  for (const auto& sw : ast.sweeps)
    os << "sweep " << sw.path.str() << " " << fmt_double(sw.start) << " " << fmt_double(sw.stop)
       << " " << sw.steps << "\n";
  return os.str();
}

void set_parameter(SequenceAst& ast, const ParamPath& path, double value) {
  std::string err;
  double* f = resolve(ast, path, &err);
  if (!f) throw std::invalid_argument(err);
  *f = value;
}

double get_parameter(const SequenceAst& ast, const ParamPath& path) {
  std::string err;
  SequenceAst& mut = const_cast<SequenceAst&>(ast);
  double* f = resolve(mut, path, &err);
  if (!f) throw std::invalid_argument(err);
  return *f;
}

std::vector<SequenceAst> expand_sweeps(const SequenceAst& ast) {
  SequenceAst base = ast;
  base.sweeps.clear();
  if (ast.sweeps.empty()) return {base};

  std::vector<SequenceAst> out;
  auto outer = ast.sweeps[0].values();
  if (ast.sweeps.size() == 1) {
    out.reserve(outer.size());
    for (double v : outer) {
      SequenceAst c = base;
      set_parameter(c, ast.sweeps[0].path, v);
      out.push_back(std::move(c));
    }
    return out;
  }
  auto inner = ast.sweeps[1].values();
  out.reserve(outer.size() * inner.size());
  for (double vo : outer)
    for (double vi : inner) {
      SequenceAst c = base;
      set_parameter(c, ast.sweeps[0].path, vo);
      set_parameter(c, ast.sweeps[1].path, vi);
      out.push_back(std::move(c));
    }
  return out;
}

}  // namespace odmr::seq
