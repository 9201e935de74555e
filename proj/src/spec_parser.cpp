#include "meanlab/spec_parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meanlab/error.hpp"

namespace meanlab {

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    AnySpec parse() {
        skip_ws();
        if (at_end()) fail(ParseErrorKind::Syntax, "empty expression");
        AnySpec v = spec();
        skip_ws();
        if (!at_end()) fail(ParseErrorKind::Syntax, "unexpected trailing input");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(ParseErrorKind k, const std::string& msg) { fail_at(k, msg, pos_); }
    [[noreturn]] void fail_at(ParseErrorKind k, const std::string& msg, std::size_t at) {
        throw ParseError(k, msg, at);
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(ParseErrorKind::Syntax, std::string("expected '") + c + "'");
    }

    std::string ident() {
        skip_ws();
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail(ParseErrorKind::Syntax, "expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }

    double number(ParseErrorKind kind) {
        skip_ws();
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        if (first != last && *first == '+') ++first;
        double v = 0;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || !std::isfinite(v)) fail(kind, "expected a finite number");
        pos_ = static_cast<std::size_t>(res.ptr - s_.data());
        return v;
    }

    // A ',' continues the kvlist only when followed by `key =`; otherwise it
    // belongs to an enclosing combinator.
    bool more_pairs() {
        const std::size_t save = pos_;
        if (!accept(',')) return false;
        skip_ws();
        std::size_t i = pos_;
        while (i < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i])) || s_[i] == '_')) ++i;
        while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
        if (i > pos_ && !std::isdigit(static_cast<unsigned char>(s_[pos_])) && i < s_.size() &&
            s_[i] == '=')
            return true;
        pos_ = save;
        return false;
    }

    std::map<std::string, double> kvlist(const std::string& name,
                                         std::initializer_list<const char*> allowed) {
        std::map<std::string, double> kv;
        do {
            skip_ws();
            const std::size_t at = pos_;
            std::string key;
            try {
                key = ident();
            } catch (const ParseError&) {
                fail_at(ParseErrorKind::MalformedKvlist, "malformed kvlist for '" + name + "'", at);
            }
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok)
                fail_at(ParseErrorKind::MalformedKvlist,
                        "unknown key '" + key + "' for '" + name + "'", at);
            if (kv.count(key))
                fail_at(ParseErrorKind::MalformedKvlist, "duplicate key '" + key + "'", at);
            if (!accept('='))
                fail(ParseErrorKind::MalformedKvlist, "expected '=' after key '" + key + "'");
            kv[key] = number(ParseErrorKind::MalformedKvlist);
        } while (more_pairs());
        return kv;
    }

    double required(const std::map<std::string, double>& kv, const char* key,
                    const std::string& name, std::size_t at) {
        auto it = kv.find(key);
        if (it == kv.end())
            fail_at(ParseErrorKind::MalformedKvlist,
                    "'" + name + "' requires key '" + std::string(key) + "'", at);
        return it->second;
    }

    MultSpec mult_arg(const std::string& comb) {
        skip_ws();
        const std::size_t at = pos_;
        AnySpec v = spec();
        if (auto* m = std::get_if<MultSpec>(&v)) return *m;
        fail_at(ParseErrorKind::Type, "'" + comb + "' expects a multiplicative argument", at);
    }

    AnySpec combinator(const std::string& name, std::size_t at) {
        // arity: number of arguments after the leading spec
        const std::map<std::string, int> arity = {
            {"twist", 1}, {"coprime", 1}, {"conv", 1}, {"expext", 0}, {"cofactor", 1}};
        expect('(');
        MultSpec f = mult_arg(name);
        const int want = arity.at(name);
        int got = 0;
        std::vector<std::size_t> arg_pos;
        std::optional<MultSpec> g;
        double num = 0;
        while (accept(',')) {
            ++got;
            skip_ws();
            arg_pos.push_back(pos_);
            if (got > want) {
                fail(ParseErrorKind::Arity, "'" + name + "' takes " + std::to_string(want + 1) +
                                                " argument(s)");
            }
            if (name == "conv" || name == "cofactor")
                g = mult_arg(name);
            else
                num = number(ParseErrorKind::Syntax);
        }
        if (got != want)
            fail(ParseErrorKind::Arity,
                 "'" + name + "' takes " + std::to_string(want + 1) + " argument(s)");
        expect(')');

        try {
            if (name == "twist") return twist(f, num);
            if (name == "coprime") {
                if (num < 1 || num != std::floor(num) || num > 1.8e19)
                    fail_at(ParseErrorKind::Syntax, "coprime modulus must be a positive integer",
                            arg_pos[0]);
                return restrict_coprime(f, static_cast<std::uint64_t>(num));
            }
            if (name == "conv") return convolve_spec(f, *g);
            if (name == "expext") return exp_extension(f);
            return cofactor(f, *g);
        } catch (const ContractError& e) {
            fail_at(ParseErrorKind::Syntax, e.what(), at);
        }
    }

    AnySpec spec() {
        skip_ws();
        const std::size_t at = pos_;
        const std::string name = ident();
        static const char* combs[] = {"twist", "coprime", "conv", "expext", "cofactor"};
        for (const char* c : combs)
            if (name == c) return combinator(name, at);

        skip_ws();
        const bool has_kv = peek() == ':';
        if (has_kv) ++pos_;
        auto no_kv = [&] {
            if (has_kv)
                fail(ParseErrorKind::MalformedKvlist, "'" + name + "' takes no parameters");
        };
        try {
            if (name == "one") return no_kv(), AnySpec(one());
            if (name == "squarefree") return no_kv(), AnySpec(squarefree());
            if (name == "omega") return no_kv(), AnySpec(omega());
            if (name == "bigomega") return no_kv(), AnySpec(bigomega());
            if (name == "divisor" || name == "omega_exp" || name == "bigomega_exp") {
                const char* key = name == "divisor" ? "rho" : "z";
                if (!has_kv)
                    fail(ParseErrorKind::MalformedKvlist,
                         "'" + name + "' requires ':" + key + "=<number>'");
                const auto kv = kvlist(name, {key});
                const double v = required(kv, key, name, at);
                if (name == "divisor") return divisor(v);
                if (name == "omega_exp") return omega_exp(v);
                return bigomega_exp(v);
            }
        } catch (const ContractError& e) {
            fail_at(ParseErrorKind::MalformedKvlist, e.what(), at);
        }
        fail_at(ParseErrorKind::UnknownName, "unknown name '" + name + "'", at);
    }
};

} // namespace

AnySpec parse_spec(std::string_view expr) { return Parser(expr).parse(); }

MultSpec parse_mult(std::string_view expr) {
    AnySpec v = parse_spec(expr);
    if (auto* m = std::get_if<MultSpec>(&v)) return *m;
    throw ParseError(ParseErrorKind::Type, "expected a multiplicative function", 0);
}

AddSpec parse_add(std::string_view expr) {
    AnySpec v = parse_spec(expr);
    if (auto* a = std::get_if<AddSpec>(&v)) return *a;
    throw ParseError(ParseErrorKind::Type, "expected an additive function", 0);
}

} // namespace meanlab
