#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "odmr/spin.hpp"

// Line-oriented pulse-sequence language.
//
//   # comment
//   tone XZ freq 1449 rabi 5 [pair xz]
//   laser 10            # us
//   mw XZ 100 [phase 90] [detuning 2.5]   # ns, deg, MHz
//   wait 0.5            # us
//   read 10             # us
//   sweep mw[0].duration 0 1000 101
//
// A sequence must start with a laser statement and end with a read
// statement; at most two sweep declarations are allowed. Sweep paths
// address the n-th statement of a kind (mw[1] is the second mw line)
// or a tone by index (tone[0].freq).

namespace odmr::seq {

struct SourcePos {
  int line = 0, col = 0;
};

struct ToneDecl {
  std::string name;
  double freq_mhz = 0.0;
  double rabi_mhz = 0.0;
  std::optional<spin::Pair> pair;  // inferred from freq when absent
  SourcePos pos;

  friend bool operator==(const ToneDecl& a, const ToneDecl& b) {
    return a.name == b.name && a.freq_mhz == b.freq_mhz && a.rabi_mhz == b.rabi_mhz &&
           a.pair == b.pair;
  }
};

struct LaserStmt {
  double duration_us = 0.0;
  friend bool operator==(const LaserStmt&, const LaserStmt&) = default;
};
struct MwStmt {
  std::string tone;
  double duration_ns = 0.0;
  double phase_deg = 0.0;
  double detuning_mhz = 0.0;
  friend bool operator==(const MwStmt&, const MwStmt&) = default;
};
struct WaitStmt {
  double duration_us = 0.0;
  friend bool operator==(const WaitStmt&, const WaitStmt&) = default;
};
struct ReadStmt {
  double duration_us = 0.0;
  friend bool operator==(const ReadStmt&, const ReadStmt&) = default;
};

struct Statement {
  std::variant<LaserStmt, MwStmt, WaitStmt, ReadStmt> node;
  SourcePos pos;
  friend bool operator==(const Statement& a, const Statement& b) { return a.node == b.node; }
};

// Path of a sweepable parameter: kind[index].field
struct ParamPath {
  std::string kind;   // laser | mw | wait | read | tone
  int index = 0;      // n-th statement of that kind / n-th tone
  std::string field;  // duration | phase | detuning | freq | rabi
  friend bool operator==(const ParamPath&, const ParamPath&) = default;
  std::string str() const;
};

struct SweepDecl {
  ParamPath path;
  double start = 0.0, stop = 0.0;
  int steps = 1;
  SourcePos pos;
  friend bool operator==(const SweepDecl& a, const SweepDecl& b) {
    return a.path == b.path && a.start == b.start && a.stop == b.stop && a.steps == b.steps;
  }
  std::vector<double> values() const;
};

struct SequenceAst {
  std::vector<ToneDecl> tones;
  std::vector<Statement> statements;
  std::vector<SweepDecl> sweeps;
  friend bool operator==(const SequenceAst&, const SequenceAst&) = default;
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

struct ParseResult {
  std::optional<SequenceAst> ast;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return ast.has_value(); }
};

ParseResult parse(std::string_view text);

// Canonical form: shortest round-trip numbers, defaulted fields
// omitted. parse(print(ast)) reproduces the AST exactly.
std::string print(const SequenceAst& ast);

// Set the parameter addressed by path. Throws std::invalid_argument on
// a dangling path.
void set_parameter(SequenceAst& ast, const ParamPath& path, double value);
double get_parameter(const SequenceAst& ast, const ParamPath& path);

// All concrete sequences of the sweep grid, sweeps cleared; first
// sweep is the slow (outer) axis. No sweeps yields the ast itself.
std::vector<SequenceAst> expand_sweeps(const SequenceAst& ast);

}  // namespace odmr::seq
