#pragma once

// Recursive-descent parser for the expression DSL and for the sectioned
// problem-definition (.vp) file format.
//
// Expression grammar (whitespace-insensitive, '#' comments to end of line):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          ^ right-associative; the exponent
//                                        subexpression must fold to an integer
//   atom   := number | identifier | func '(' expr ')' | '(' expr ')'
//
// Identifiers are x<i>, u<j>, and jet coordinates u<j>_<d1><d2>...<dk> where
// each d is an independent-variable name (e.g. u1_x1x1x2). "x" and "u" are
// accepted as aliases for x1/u1 when n = 1 / m = 1. Derivative suffixes are
// canonicalized as multi-indices, so u_x2x1 and u_x1x2 denote the same
// coordinate.

#include "varcond/errors.hpp"
#include "varcond/expr.hpp"
#include "varcond/jet.hpp"
#include "varcond/problem.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace varcond {

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view text, const JetSpec& vocab, std::size_t base_offset)
        : text_(text), vocab_(vocab), base_(base_offset) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError("unexpected trailing input", base_ + pos_);
        return e;
    }

private:
    std::string_view text_;
    const JetSpec& vocab_;
    std::size_t base_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw SyntaxError(std::string("expected '") + c + "'", base_ + pos_);
        ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = add(e, parse_term());
            else if (accept('-'))
                e = sub(e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*'))
                e = mul(e, parse_unary());
            else if (accept('/'))
                e = divide(e, parse_unary());
            else
                return e;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return neg(parse_unary());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '^') {
            const std::size_t caret = pos_;
            ++pos_;
            const Expr raw = parse_unary();
            const Expr folded = simplify(raw);
            if (!folded.is_constant())
                throw SyntaxError("exponent must be an integer constant", base_ + caret);
            const double v = folded.constant_value();
            const double r = std::nearbyint(v);
            if (std::abs(v - r) > 1e-9 || std::abs(r) > 1e9)
                throw SyntaxError("exponent must be an integer constant", base_ + caret);
            return powi(base, static_cast<int>(r));
        }
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw SyntaxError("unexpected end of expression", base_ + pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError("unexpected character", base_ + pos_);
    }

    Expr parse_number() {
        double value = 0.0;
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc{})
            throw SyntaxError("malformed number", base_ + pos_);
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        return Expr::constant(value);
    }

    Expr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view word = text_.substr(start, pos_ - start);

        for (FuncKind fn : {FuncKind::Sin, FuncKind::Cos, FuncKind::Exp, FuncKind::Log,
                            FuncKind::Sqrt}) {
            if (word == func_name(fn)) {
                expect('(');
                Expr arg = parse_expr();
                expect(')');
                return apply(fn, arg);
            }
        }

        if (word[0] == 'x') {
            const int axis = parse_var_index(word.substr(1), vocab_.n(), "x", start);
            return Expr::indep(axis);
        }
        if (word[0] == 'u') {
            std::size_t i = 1;
            while (i < word.size() && std::isdigit(static_cast<unsigned char>(word[i]))) ++i;
            const int dep = parse_var_index(word.substr(1, i - 1), vocab_.m(), "u", start);
            MultiIndex idx = MultiIndex::zeros(vocab_.n());
            if (i < word.size()) {
                if (word[i] != '_')
                    throw UnknownIdentifier("unknown identifier '" + std::string(word) + "'",
                                            base_ + start);
                ++i;
                if (i == word.size())
                    throw UnknownIdentifier("empty derivative suffix in '" + std::string(word) +
                                            "'", base_ + start);
                while (i < word.size()) {
                    if (word[i] != 'x')
                        throw UnknownIdentifier("bad derivative suffix in '" + std::string(word) +
                                                "'", base_ + start);
                    ++i;
                    std::size_t d = i;
                    while (d < word.size() && std::isdigit(static_cast<unsigned char>(word[d])))
                        ++d;
                    const int axis =
                        parse_var_index(word.substr(i, d - i), vocab_.n(), "x", start);
                    ++idx.count(axis);
                    i = d;
                }
            }
            if (idx.order() > vocab_.s())
                throw OrderExceeded("derivative order " + std::to_string(idx.order()) +
                                    " of '" + std::string(word) + "' exceeds declared order " +
                                    std::to_string(vocab_.s()), base_ + start);
            return Expr::jet(JetCoordinate{dep, std::move(idx)});
        }
        throw UnknownIdentifier("unknown identifier '" + std::string(word) + "'", base_ + start);
    }

    // Digits after an x/u prefix; empty means the bare alias, valid only when
    // the family has a single member.
    int parse_var_index(std::string_view digits, int limit, const char* family,
                        std::size_t at) const {
        if (digits.empty()) {
            if (limit == 1) return 1;
            throw UnknownIdentifier(std::string("bare '") + family +
                                    "' is only valid when there is exactly one", base_ + at);
        }
        int v = 0;
        auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || v < 1 ||
            v > limit)
            throw UnknownIdentifier(std::string("no such variable '") + family +
                                    std::string(digits) + "'", base_ + at);
        return v;
    }
};

} // namespace detail

/// Parse one expression under the vocabulary of `vocab` (independent names
/// x1..xn, dependent names u1..um, jet coordinates up to order s).
inline Expr parse_expression(std::string_view text, const JetSpec& vocab,
                             std::size_t base_offset = 0) {
    return detail::ExprParser(text, vocab, base_offset).parse();
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

/// Raw problem-file text split into sections of key/value lines, with byte
/// offsets retained for diagnostics.
struct ProblemSource {
    struct Entry {
        std::string key;
        std::string value;
        std::size_t value_offset = 0;
        std::size_t key_offset = 0;
    };
    std::string raw;
    std::vector<std::pair<std::string, std::vector<Entry>>> sections;

    const std::vector<Entry>* find(std::string_view name) const {
        for (const auto& [section, entries] : sections)
            if (section == name) return &entries;
        return nullptr;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_full_double(std::string_view s, std::size_t offset) {
    double v = 0.0;
    const std::string_view t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw SyntaxError("malformed number '" + std::string(t) + "'", offset);
    return v;
}

inline long long parse_full_int(std::string_view s, std::size_t offset) {
    long long v = 0;
    const std::string_view t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw SyntaxError("malformed integer '" + std::string(t) + "'", offset);
    return v;
}

inline std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace detail

/// Split a problem file into sections. Blank lines and '#' comments are
/// ignored; every other line must be a [section] header or key = value.
inline ProblemSource scan_sections(std::string_view text) {
    ProblemSource src;
    src.raw = std::string(text);
    std::vector<ProblemSource::Entry>* current = nullptr;

    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);

        const std::string_view stripped = detail::trim(line);
        if (!stripped.empty()) {
            const std::size_t stripped_at =
                line_start + static_cast<std::size_t>(stripped.data() - line.data());
            if (stripped.front() == '[') {
                if (stripped.back() != ']')
                    throw SyntaxError("unterminated section header", stripped_at);
                std::string name(detail::trim(stripped.substr(1, stripped.size() - 2)));
                if (name.empty()) throw SyntaxError("empty section name", stripped_at);
                for (const auto& [existing, _] : src.sections)
                    if (existing == name)
                        throw SyntaxError("duplicate section [" + name + "]", stripped_at);
                src.sections.emplace_back(std::move(name),
                                          std::vector<ProblemSource::Entry>{});
                current = &src.sections.back().second;
            } else {
                const std::size_t eq = stripped.find('=');
                if (eq == std::string_view::npos)
                    throw SyntaxError("expected 'key = value'", stripped_at);
                if (current == nullptr)
                    throw SyntaxError("key/value line before any [section]", stripped_at);
                ProblemSource::Entry entry;
                entry.key = std::string(detail::trim(stripped.substr(0, eq)));
                const std::string_view value = stripped.substr(eq + 1);
                const std::string_view value_trimmed = detail::trim(value);
                entry.value = std::string(value_trimmed);
                entry.key_offset = stripped_at;
                entry.value_offset =
                    value_trimmed.empty()
                        ? stripped_at + eq + 1
                        : stripped_at + static_cast<std::size_t>(value_trimmed.data() -
                                                                 stripped.data());
                if (entry.key.empty()) throw SyntaxError("empty key", stripped_at);
                for (const auto& other : *current)
                    if (other.key == entry.key)
                        throw SyntaxError("duplicate key '" + entry.key + "'", stripped_at);
                current->push_back(std::move(entry));
            }
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return src;
}

namespace detail {

inline const ProblemSource::Entry& require_key(const std::vector<ProblemSource::Entry>& entries,
                                               std::string_view key,
                                               std::string_view section) {
    for (const auto& e : entries)
        if (e.key == key) return e;
    throw MissingKey("missing key '" + std::string(key) + "' in section [" +
                     std::string(section) + "]");
}

inline const ProblemSource::Entry* find_key(const std::vector<ProblemSource::Entry>& entries,
                                            std::string_view key) {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

// The declared names must be the canonical ones the expression grammar knows:
// x1..xn / u1..um, or the bare alias when there is exactly one.
inline void check_names(const std::vector<std::string>& names, char family,
                        std::size_t offset) {
    if (names.empty())
        throw SyntaxError(std::string("at least one '") + family + "' variable is required",
                          offset);
    if (names.size() == 1 && names[0] == std::string(1, family)) return;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string expected = std::string(1, family) + std::to_string(i + 1);
        if (names[i] != expected)
            throw SyntaxError("variable " + std::to_string(i + 1) + " must be named '" +
                              expected + "' (got '" + names[i] + "')", offset);
    }
}

} // namespace detail

/// Parse and validate a complete problem file.
inline Problem parse_problem(std::string_view text) {
    const ProblemSource src = scan_sections(text);

    for (const auto& [name, entries] : src.sections) {
        (void)entries;
        if (name != "problem" && name != "domain" && name != "candidate" && name != "numerics")
            throw SyntaxError("unknown section [" + name + "]");
    }
    const auto* problem_sec = src.find("problem");
    if (!problem_sec) throw MissingSection("missing section [problem]");
    const auto* domain_sec = src.find("domain");
    if (!domain_sec) throw MissingSection("missing section [domain]");
    const auto* candidate_sec = src.find("candidate");
    if (!candidate_sec) throw MissingSection("missing section [candidate]");

    for (const auto& e : *problem_sec)
        if (e.key != "independent" && e.key != "dependent" && e.key != "order" &&
            e.key != "lagrangian")
            throw SyntaxError("unknown key '" + e.key + "' in [problem]", e.key_offset);

    const auto& indep_entry = detail::require_key(*problem_sec, "independent", "problem");
    const auto& dep_entry = detail::require_key(*problem_sec, "dependent", "problem");
    const auto& order_entry = detail::require_key(*problem_sec, "order", "problem");
    const auto& lagr_entry = detail::require_key(*problem_sec, "lagrangian", "problem");

    const std::vector<std::string> indep_names = detail::split_words(indep_entry.value);
    const std::vector<std::string> dep_names = detail::split_words(dep_entry.value);
    detail::check_names(indep_names, 'x', indep_entry.value_offset);
    detail::check_names(dep_names, 'u', dep_entry.value_offset);

    const long long order = detail::parse_full_int(order_entry.value, order_entry.value_offset);
    if (order < 1 || order > 8)
        throw SyntaxError("order must be between 1 and 8", order_entry.value_offset);

    JetSpec spec(static_cast<int>(indep_names.size()), static_cast<int>(dep_names.size()),
                 static_cast<int>(order));
    const Expr lagrangian =
        parse_expression(lagr_entry.value, spec, lagr_entry.value_offset);

    // [domain]: one "a b" pair per independent name, in any order.
    std::vector<std::array<double, 2>> bounds;
    for (const auto& e : *domain_sec) {
        bool known = false;
        for (const auto& name : indep_names) known = known || e.key == name;
        if (!known)
            throw SyntaxError("unknown domain axis '" + e.key + "'", e.key_offset);
    }
    for (const auto& name : indep_names) {
        const auto& e = detail::require_key(*domain_sec, name, "domain");
        const std::vector<std::string> parts = detail::split_words(e.value);
        if (parts.size() != 2)
            throw SyntaxError("domain bounds must be two numbers 'a b'", e.value_offset);
        const double a = detail::parse_full_double(parts[0], e.value_offset);
        const double b = detail::parse_full_double(parts[1], e.value_offset);
        if (!(a < b))
            throw BadBounds("empty domain for " + name + ": need a < b", e.value_offset);
        bounds.push_back({a, b});
    }
    BoxDomain domain(std::move(bounds));

    // [candidate]: one expression in x per dependent name.
    std::vector<Expr> candidate;
    for (const auto& e : *candidate_sec) {
        bool known = false;
        for (const auto& name : dep_names) known = known || e.key == name;
        if (!known)
            throw SyntaxError("unknown candidate component '" + e.key + "'", e.key_offset);
    }
    for (const auto& name : dep_names) {
        const auto& e = detail::require_key(*candidate_sec, name, "candidate");
        Expr expr = parse_expression(e.value, spec, e.value_offset);
        if (!free_coordinates(expr).empty())
            throw SyntaxError("candidate '" + name +
                              "' may only use independent variables", e.value_offset);
        candidate.push_back(std::move(expr));
    }

    NumericParams numerics;
    numerics.grid.assign(static_cast<std::size_t>(spec.n()), 9);
    if (const auto* numerics_sec = src.find("numerics")) {
        for (const auto& e : *numerics_sec) {
            if (e.key == "grid") {
                const std::vector<std::string> parts = detail::split_words(e.value);
                if (parts.size() != 1 && parts.size() != static_cast<std::size_t>(spec.n()))
                    throw SyntaxError("grid needs 1 or n values", e.value_offset);
                std::vector<int> grid;
                for (const auto& p : parts) {
                    const long long g = detail::parse_full_int(p, e.value_offset);
                    if (g < 1 || g > 4096)
                        throw SyntaxError("grid counts must be in 1..4096", e.value_offset);
                    grid.push_back(static_cast<int>(g));
                }
                if (grid.size() == 1)
                    grid.assign(static_cast<std::size_t>(spec.n()), grid[0]);
                numerics.grid = std::move(grid);
            } else if (e.key == "quad_nodes") {
                const long long q = detail::parse_full_int(e.value, e.value_offset);
                if (q < 2 || q > 256)
                    throw SyntaxError("quad_nodes must be in 2..256", e.value_offset);
                numerics.quad_nodes = static_cast<int>(q);
            } else if (e.key == "tol_pd") {
                numerics.tol_pd = detail::parse_full_double(e.value, e.value_offset);
                if (!(numerics.tol_pd > 0.0))
                    throw SyntaxError("tol_pd must be positive", e.value_offset);
            } else if (e.key == "tol_residual") {
                numerics.tol_residual = detail::parse_full_double(e.value, e.value_offset);
                if (!(numerics.tol_residual > 0.0))
                    throw SyntaxError("tol_residual must be positive", e.value_offset);
            } else if (e.key == "seed") {
                numerics.seed = static_cast<std::uint64_t>(
                    detail::parse_full_int(e.value, e.value_offset));
            } else {
                throw SyntaxError("unknown key '" + e.key + "' in [numerics]", e.key_offset);
            }
        }
    }

    return Problem{std::move(spec), lagrangian, std::move(domain), std::move(candidate),
                   std::move(numerics), indep_names, dep_names};
}

/// 1-based line and column of a byte offset, for diagnostics.
inline std::pair<int, int> line_col(std::string_view text, std::size_t offset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace varcond
