#include "fracasym/coeffexpr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fracasym/error.hpp"

namespace fracasym {
namespace {

using Kind = ExprNode::Kind;

Expr make_node(Kind k, std::vector<Expr> children = {}, double value = 0.0) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->value = value;
    n->children = std::move(children);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    Expr parse() {
        for (std::size_t i = 0; i < s_.size(); ++i) {
            if (static_cast<unsigned char>(s_[i]) > 127) throw ParseError("non-ASCII character", i);
        }
        skip_ws();
        if (pos_ == s_.size()) throw ParseError("empty expression", 0);
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " at offset " + std::to_string(pos_), pos_);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
                                    s_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        Expr lhs = term();
        while (true) {
            if (accept('+')) {
                lhs = make_node(Kind::add, {lhs, term()});
            } else if (accept('-')) {
                lhs = make_node(Kind::sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = unary();
        while (true) {
            if (accept('*')) {
                lhs = make_node(Kind::mul, {lhs, unary()});
            } else if (accept('/')) {
                lhs = make_node(Kind::div, {lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return make_node(Kind::neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return make_node(Kind::pow, {base, unary()});
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr number() {
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return make_node(Kind::constant, {}, v);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                    s_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = s_.substr(start, pos_ - start);
        if (name == "t") return make_node(Kind::variable);
        Kind k;
        if (name == "exp") {
            k = Kind::exp;
        } else if (name == "sin") {
            k = Kind::sin;
        } else if (name == "cos") {
            k = Kind::cos;
        } else if (name == "abs") {
            k = Kind::abs;
        } else {
            pos_ = start;
            fail("unknown identifier '" + std::string(name) + "'");
        }
        expect('(');
        Expr arg = expr();
        expect(')');
        return make_node(k, {arg});
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

double eval_node(const ExprNode& n, double t) {
    switch (n.kind) {
        case Kind::constant: return n.value;
        case Kind::variable: return t;
        case Kind::add: return eval_node(*n.children[0], t) + eval_node(*n.children[1], t);
        case Kind::sub: return eval_node(*n.children[0], t) - eval_node(*n.children[1], t);
        case Kind::mul: return eval_node(*n.children[0], t) * eval_node(*n.children[1], t);
        case Kind::div: {
            const double den = eval_node(*n.children[1], t);
            if (den == 0.0) throw DomainError("coefficient: zero denominator at t = " + std::to_string(t));
            return eval_node(*n.children[0], t) / den;
        }
        case Kind::pow: return std::pow(eval_node(*n.children[0], t), eval_node(*n.children[1], t));
        case Kind::neg: return -eval_node(*n.children[0], t);
        case Kind::exp: return std::exp(eval_node(*n.children[0], t));
        case Kind::sin: return std::sin(eval_node(*n.children[0], t));
        case Kind::cos: return std::cos(eval_node(*n.children[0], t));
        case Kind::abs: return std::fabs(eval_node(*n.children[0], t));
    }
    return 0.0;
}

void print_node(const ExprNode& n, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print_node(*n.children[0], out);
        out += op;
        print_node(*n.children[1], out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print_node(*n.children[0], out);
        out += ')';
    };
    switch (n.kind) {
        case Kind::constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case Kind::variable: out += 't'; return;
        case Kind::add: binary("+"); return;
        case Kind::sub: binary("-"); return;
        case Kind::mul: binary("*"); return;
        case Kind::div: binary("/"); return;
        case Kind::pow: binary("^"); return;
        case Kind::neg:
            out += "(-";
            print_node(*n.children[0], out);
            out += ')';
            return;
        case Kind::exp: call("exp"); return;
        case Kind::sin: call("sin"); return;
        case Kind::cos: call("cos"); return;
        case Kind::abs: call("abs"); return;
    }
}

bool guard_node(const ExprNode& n, double t) {
    for (const auto& c : n.children) {
        if (!guard_node(*c, t)) return false;
    }
    if (n.kind == Kind::div) {
        try {
            return eval_node(*n.children[1], t) != 0.0;
        } catch (const DomainError&) {
            return false;
        }
    }
    return true;
}

bool is_zero_constant(const ExprNode& n) {
    return n.kind == Kind::constant && n.value == 0.0;
}

}  // namespace

Expr parse_coefficient(std::string_view text) { return Parser(text).parse(); }

std::string print_expr(const Expr& e) {
    std::string out;
    print_node(*e, out);
    return out;
}

double eval_expr(const Expr& e, double t) {
    const double v = eval_node(*e, t);
    if (!std::isfinite(v)) {
        throw DomainError("coefficient: non-finite value at t = " + std::to_string(t));
    }
    return v;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a->kind != b->kind || a->children.size() != b->children.size()) return false;
    if (a->kind == Kind::constant && a->value != b->value) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i) {
        if (!structurally_equal(a->children[i], b->children[i])) return false;
    }
    return true;
}

bool denominators_nonzero(const Expr& e, std::span<const double> ts) {
    return std::all_of(ts.begin(), ts.end(), [&](double t) { return guard_node(*e, t); });
}

Coefficient Coefficient::from_expression(std::string_view text, std::optional<TailModel> envelope) {
    Coefficient c;
    c.expr_ = parse_coefficient(text);
    c.envelope_ = envelope;
    return c;
}

Coefficient Coefficient::from_samples(std::vector<std::pair<double, double>> samples,
                                      std::optional<TailModel> envelope) {
    if (samples.size() < 2) throw ParseError("coefficient table needs at least two samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second)) {
            throw ParseError("coefficient table has a non-finite entry", i);
        }
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            throw ParseError("coefficient table times must be strictly increasing", i);
        }
    }
    if (samples.front().first != 0.0) throw ParseError("coefficient table must start at t = 0");
    Coefficient c;
    c.samples_ = std::move(samples);
    c.envelope_ = envelope;
    return c;
}

Coefficient Coefficient::zero() {
    return from_expression("0", TailModel::zero());
}

double Coefficient::operator()(double t) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("coefficient: t must be finite and >= 0");
    double v;
    if (expr_) {
        v = eval_expr(expr_, t);
    } else {
        if (t > samples_.back().first) {
            throw DomainError("coefficient: t = " + std::to_string(t) + " beyond the sample table");
        }
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double x, const auto& p) { return x < p.first; });
        if (it == samples_.end()) {
            v = samples_.back().second;
        } else {
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            v = lo.second + (hi.second - lo.second) * (t - lo.first) / (hi.first - lo.first);
        }
    }
    if (power_weight_ != 0.0) v *= std::pow(t, power_weight_);
    return scale_ * v;
}

Coefficient Coefficient::scaled(double lambda) const {
    Coefficient c(*this);
    c.scale_ *= lambda;
    if (c.envelope_ && c.envelope_->kind == TailModel::Kind::power) {
        c.envelope_->amplitude *= std::fabs(lambda);
    }
    return c;
}

Coefficient Coefficient::with_power_weight(double q) const {
    Coefficient c(*this);
    c.power_weight_ += q;
    if (c.envelope_ && c.envelope_->kind == TailModel::Kind::power) c.envelope_->exponent -= q;
    return c;
}

Coefficient Coefficient::with_envelope(TailModel envelope) const {
    Coefficient c(*this);
    c.envelope_ = envelope;
    return c;
}

double Coefficient::eval_limit() const {
    return expr_ ? std::numeric_limits<double>::infinity() : samples_.back().first;
}

std::string Coefficient::source() const {
    std::string s = expr_ ? print_expr(expr_)
                          : "samples[" + std::to_string(samples_.size()) + "]";
    if (power_weight_ != 0.0) s = "t^" + std::to_string(power_weight_) + "*" + s;
    if (scale_ != 1.0) s = std::to_string(scale_) + "*" + s;
    return s;
}

bool Coefficient::is_identically_zero() const {
    if (scale_ == 0.0) return true;
    if (expr_) return is_zero_constant(*expr_);
    return std::all_of(samples_.begin(), samples_.end(), [](const auto& p) { return p.second == 0.0; });
}

double eval_coefficient(const Coefficient& c, double t) { return c(t); }

EnvelopeCheck check_envelope(const Coefficient& c, const GradedGrid& grid) {
    EnvelopeCheck out;
    if (!c.envelope()) {
        out.ok = false;
        out.max_violation = std::numeric_limits<double>::infinity();
        return out;
    }
    const TailModel& env = *c.envelope();
    for (double t : grid.nodes()) {
        if (t < env.valid_from || t <= 0.0 || t > c.eval_limit()) continue;
        const double bound = env.bound(t);
        const double a = std::fabs(c(t));
        ++out.nodes_checked;
        if (a > bound * (1.0 + 1e-12)) {
            out.ok = false;
            out.max_violation = std::max(out.max_violation, a - bound);
        }
    }
    return out;
}

std::vector<double> sample_coefficient(const Coefficient& c, const GradedGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = c(grid[j]);
    return v;
}

}  // namespace fracasym
