#include "q1d/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "q1d/errors.hpp"

namespace q1d {

namespace {

constexpr const char* kTaskNames[] = {"lyap-scan", "ids",       "furstenberg", "zipper-check", "thouless",
                                      "wegner",    "eigenmode", "transport",   "selftest"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (s[i] == sep && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
    fail(ErrorKind::ValidationError, key + ": " + what);
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const std::string t = trim(text);
    const char* b = t.data();
    const char* e = b + t.size();
    if (!t.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) invalid(key, "expected a finite number, got '" + t + "'");
    return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr == t.data() + t.size()) return v;
    // accept integral values written as 1e6
    const double d = to_double(key, t);
    if (d != std::floor(d) || std::abs(d) > 9e15) invalid(key, "expected an integer, got '" + t + "'");
    return static_cast<std::int64_t>(d);
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) invalid(key, "expected a non-negative integer");
    return v;
}

cplx to_complex(const std::string& key, const std::string& text) {
    std::string t;
    for (char c : text)
        if (c != ' ' && c != '\t') t += c;
    if (t.empty()) invalid(key, "empty complex number");
    if (t.back() != 'i') return {to_double(key, t), 0.0};
    t.pop_back();
    std::size_t cut = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;) {
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            cut = k;
            break;
        }
    }
    auto imag_of = [&](const std::string& s) {
        if (s.empty() || s == "+") return 1.0;
        if (s == "-") return -1.0;
        return to_double(key, s);
    };
    if (cut == std::string::npos) return {0.0, imag_of(t)};
    return {to_double(key, t.substr(0, cut)), imag_of(t.substr(cut))};
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    for (const char* fn : {"linspace", "logspace"}) {
        const std::string f = fn;
        if (t.rfind(f + "(", 0) == 0 && t.back() == ')') {
            const auto args = split(std::string_view(t).substr(f.size() + 1, t.size() - f.size() - 2), ',');
            if (args.size() != 3) invalid(key, f + " takes (start, stop, count)");
            const double a = to_double(key, args[0]), b = to_double(key, args[1]);
            const auto n = to_int(key, args[2]);
            if (n < 1 || n > 100000) invalid(key, "count in [1, 100000]");
            std::vector<double> out;
            for (std::int64_t k = 0; k < n; ++k) {
                const double x = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
                out.push_back(f == "logspace" ? std::pow(10.0, x) : x);
            }
            return out;
        }
    }
    std::vector<double> out;
    for (const auto& item : split(t, ',')) out.push_back(to_double(key, item));
    return out;
}

template <typename M>
M to_matrix(const std::string& key, const std::string& text, bool complex) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : split(text, ';')) {
        std::vector<std::string> cells;
        std::istringstream is(row);
        std::string tok;
        while (is >> tok) {
            for (const auto& piece : split(tok, ','))
                if (!piece.empty()) cells.push_back(piece);
        }
        rows.push_back(cells);
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size());
    M m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != c) invalid(key, "ragged matrix rows");
        for (Eigen::Index j = 0; j < c; ++j) {
            if constexpr (std::is_same_v<typename M::Scalar, cplx>)
                m(i, j) = complex ? to_complex(key, rows[i][j]) : cplx(to_double(key, rows[i][j]), 0.0);
            else
                m(i, j) = to_double(key, rows[i][j]);
        }
    }
    return m;
}

DisorderLaw to_law(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')') invalid(key, "expected name(args), got '" + t + "'");
    const std::string name = trim(std::string_view(t).substr(0, open));
    const auto args = split(std::string_view(t).substr(open + 1, t.size() - open - 2), ',');
    DisorderLaw law;
    if (name == "bernoulli") {
        if (args.size() != 1) invalid(key, "bernoulli(p)");
        law = bernoulli01(to_double(key, args[0]));
    } else if (name == "two-point") {
        if (args.size() != 3) invalid(key, "two-point(a, b, p)");
        law = TwoPoint{to_double(key, args[0]), to_double(key, args[1]), to_double(key, args[2])};
    } else if (name == "uniform") {
        if (args.size() != 2) invalid(key, "uniform(lo, hi)");
        law = UniformInterval{to_double(key, args[0]), to_double(key, args[1])};
    } else if (name == "finite") {
        FiniteSupport fs;
        for (const auto& a : args) {
            const auto vw = split(a, ':');
            if (vw.size() != 2) invalid(key, "finite(value:weight, ...)");
            fs.values.push_back(to_double(key, vw[0]));
            fs.weights.push_back(to_double(key, vw[1]));
        }
        law = fs;
    } else {
        invalid(key, "unknown law '" + name + "'");
    }
    try {
        validate_law(law);
    } catch (const Error& e) {
        invalid(key, e.what());
    }
    return law;
}

std::string law_text(const DisorderLaw& law) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, TwoPoint>) {
                return "two-point(" + format_double(l.a) + ", " + format_double(l.b) + ", " + format_double(l.p) + ")";
            } else if constexpr (std::is_same_v<T, UniformInterval>) {
                return "uniform(" + format_double(l.lo) + ", " + format_double(l.hi) + ")";
            } else {
                std::string s = "finite(";
                for (std::size_t k = 0; k < l.values.size(); ++k) {
                    if (k) s += ", ";
                    s += format_double(l.values[k]) + ":" + format_double(l.weights[k]);
                }
                return s + ")";
            }
        },
        law);
}

std::string complex_text(cplx z) {
    if (z.imag() == 0.0) return format_double(z.real());
    std::string im = format_double(std::abs(z.imag()));
    return format_double(z.real()) + (z.imag() < 0 || std::signbit(z.imag()) ? "-" : "+") + im + "i";
}

template <typename M>
std::string matrix_text(const M& m) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) s += "; ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += " ";
            if constexpr (std::is_same_v<typename M::Scalar, cplx>)
                s += complex_text(m(i, j));
            else
                s += format_double(m(i, j));
        }
    }
    return s;
}

template <typename T>
std::string list_text(const std::vector<T>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ", ";
        if constexpr (std::is_floating_point_v<T>)
            s += format_double(v[k]);
        else
            s += std::to_string(v[k]);
    }
    return s;
}

struct Entry {
    std::string value;
    int line = 0;
};
using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>> kSectionKeys = {
    {"run", {"task", "seed", "format", "grid", "L", "steps", "realizations", "reorth", "burn_in"}},
    {"model", {"family", "D", "V0", "lambda", "law", "ell", "c", "r", "t", "phase_law", "alpha", "verblunsky"}},
    {"furstenberg", {"svd_tol", "d_O"}},
    {"zipper-check", {"samples", "svd_tol"}},
    {"wegner", {"energy", "kappa", "beta", "xi", "L_list", "trials"}},
    {"eigenmode", {"window"}},
    {"transport", {"t_grid"}},
};

const std::map<std::string, std::set<std::string>> kFamilyKeys = {
    {"discrete", {"family", "D", "V0", "lambda", "law"}},
    {"continuous", {"family", "D", "V0", "ell", "c", "law"}},
    {"point", {"family", "D", "V0", "c", "law"}},
    {"unitary-anderson", {"family", "r", "t", "phase_law"}},
    {"zipper", {"family", "D", "alpha"}},
    {"cmv", {"family", "verblunsky"}},
};

ModelSpec build_model(const Section& sec) {
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = sec.find(k);
        return it == sec.end() ? nullptr : &it->second.value;
    };
    const std::string* fam = get("family");
    if (!fam) invalid("model.family", "required");
    const auto fk = kFamilyKeys.find(*fam);
    if (fk == kFamilyKeys.end())
        invalid("model.family", "one of discrete|continuous|point|unitary-anderson|zipper|cmv");
    for (const auto& [k, e] : sec)
        if (!fk->second.count(k))
            fail(ErrorKind::UnknownKey, "line " + std::to_string(e.line) + ": key 'model." + k +
                                            "' is not valid for family " + *fam);
    auto D_of = [&]() -> int {
        const std::string* d = get("D");
        const auto D = d ? to_int("model.D", *d) : 1;
        if (D < 1 || D > 64) invalid("model.D", "1 <= D <= 64");
        return static_cast<int>(D);
    };
    auto V0_of = [&](int D) -> RMat {
        const std::string* v = get("V0");
        if (!v || trim(*v) == "default") return RMat();
        RMat m = to_matrix<RMat>("model.V0", *v, false);
        if (m.rows() != D || m.cols() != D) invalid("model.V0", "must be D x D");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0) invalid("model.V0", "must be symmetric");
        return m;
    };
    auto laws_of = [&](int D) -> std::vector<DisorderLaw> {
        const std::string* l = get("law");
        if (!l) return {bernoulli01()};
        std::vector<DisorderLaw> out;
        for (const auto& item : split(*l, ';')) out.push_back(to_law("model.law", item));
        if (out.size() != 1 && static_cast<int>(out.size()) != D) invalid("model.law", "give 1 or D laws");
        return out;
    };
    auto c_of = [&](int D) -> std::vector<double> {
        const std::string* c = get("c");
        std::vector<double> out = c ? to_list("model.c", *c) : std::vector<double>(D, 1.0);
        if (static_cast<int>(out.size()) != D) invalid("model.c", "needs D entries");
        for (double x : out)
            if (x == 0.0) invalid("model.c", "c_i != 0");
        return out;
    };
    ModelSpec spec;
    if (*fam == "discrete") {
        DiscreteQuasi1D m;
        m.D = D_of();
        m.V0 = V0_of(m.D);
        if (const auto* l = get("lambda")) m.lambda = to_double("model.lambda", *l);
        if (m.lambda < 0.0) invalid("model.lambda", "lambda >= 0");
        m.laws = laws_of(m.D);
        spec = m;
    } else if (*fam == "continuous") {
        ContinuousQuasi1D m;
        m.D = D_of();
        m.V0 = V0_of(m.D);
        if (const auto* l = get("ell")) m.ell = to_double("model.ell", *l);
        if (!(m.ell > 0.0)) invalid("model.ell", "ell > 0");
        m.c = c_of(m.D);
        m.laws = laws_of(m.D);
        spec = m;
    } else if (*fam == "point") {
        PointInteractions m;
        m.D = D_of();
        m.V0 = V0_of(m.D);
        m.c = c_of(m.D);
        m.laws = laws_of(m.D);
        spec = m;
    } else if (*fam == "unitary-anderson") {
        UnitaryAnderson m;
        const std::string* r = get("r");
        const std::string* t = get("t");
        if (!r || !t) invalid("model.r, model.t", "both required");
        m.r = to_double("model.r", *r);
        m.t = to_double("model.t", *t);
        const double s = m.r * m.r + m.t * m.t;
        if (std::abs(s - 1.0) > 1e-9)
            invalid("model.r, model.t", "constraint r^2+t^2=1 violated (r^2+t^2 = " + format_double(s) + ")");
        if (m.t == 0.0) invalid("model.t", "t != 0");
        if (const auto* pl = get("phase_law")) m.phase_law = to_law("model.phase_law", *pl);
        spec = m;
    } else if (*fam == "zipper") {
        ScatteringZipper m;
        m.D = D_of();
        const std::string* a = get("alpha");
        if (!a) invalid("model.alpha", "required");
        m.alpha = to_matrix<Mat>("model.alpha", *a, true);
        if (m.alpha.rows() != m.D || m.alpha.cols() != m.D) invalid("model.alpha", "must be D x D");
        spec = m;
    } else {
        ExtendedCMV m;
        const std::string* v = get("verblunsky");
        if (!v) invalid("model.verblunsky", "required");
        for (const auto& item : split(*v, ',')) {
            const auto vw = split(item, ':');
            m.law.values.push_back(to_complex("model.verblunsky", vw[0]));
            m.law.weights.push_back(vw.size() > 1 ? to_double("model.verblunsky", vw[1]) : 1.0);
        }
        spec = m;
    }
    try {
        validate(spec);
    } catch (const Error& e) {
        fail(ErrorKind::ValidationError, std::string("model: ") + e.what());
    }
    return spec;
}

}  // namespace

std::vector<double> default_t_grid() {
    std::vector<double> t{0.0};
    for (int k = 0; k < 20; ++k) t.push_back(std::pow(10.0, 2.0 * k / 19.0));
    return t;
}

std::string to_string(Task t) { return kTaskNames[static_cast<int>(t)]; }

Task parse_task(std::string_view name) {
    for (int k = 0; k < 9; ++k)
        if (name == kTaskNames[k]) return static_cast<Task>(k);
    fail(ErrorKind::ValidationError, "task: unknown task '" + std::string(name) + "'");
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_double17(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

namespace {

bool same_model(const std::optional<ModelSpec>& a, const std::optional<ModelSpec>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    if (a->index() != b->index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            return x == std::get<T>(*b);
        },
        *a);
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.task == b.task && same_model(a.model, b.model) && a.seed == b.seed && a.format == b.format &&
           a.grid == b.grid && a.L == b.L && a.steps == b.steps && a.realizations == b.realizations &&
           a.reorth == b.reorth && a.burn_in == b.burn_in && a.svd_tol == b.svd_tol && a.d_O == b.d_O &&
           a.samples == b.samples && a.wegner_energy == b.wegner_energy && a.kappa == b.kappa && a.beta == b.beta &&
           a.xi == b.xi && a.L_list == b.L_list && a.trials == b.trials && a.window_lo == b.window_lo &&
           a.window_hi == b.window_hi && a.t_grid == b.t_grid;
}

RunConfig parse_config(std::string_view text) {
    std::map<std::string, Section> sections;
    std::string current;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": unterminated section header");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!kSectionKeys.count(current))
                fail(ErrorKind::UnknownKey, "line " + std::to_string(lineno) + ": unknown section [" + current + "]");
            if (sections.count(current))
                fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": duplicate section [" + current + "]");
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
        if (current.empty())
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": empty key");
        if (!kSectionKeys.at(current).count(key))
            fail(ErrorKind::UnknownKey, "line " + std::to_string(lineno) + ": unknown key '" + current + "." + key + "'");
        auto& sec = sections[current];
        if (sec.count(key))
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": duplicate key '" + current + "." + key +
                                            "' (first set on line " + std::to_string(sec[key].line) + ")");
        sec[key] = {value, lineno};
    }

    RunConfig cfg;
    auto val = [&](const std::string& s, const std::string& k) -> const std::string* {
        auto it = sections.find(s);
        if (it == sections.end()) return nullptr;
        auto jt = it->second.find(k);
        return jt == it->second.end() ? nullptr : &jt->second.value;
    };
    const std::string* task = val("run", "task");
    if (!task) invalid("run.task", "required");
    cfg.task = parse_task(*task);
    if (const auto* v = val("run", "seed")) cfg.seed = to_uint("run.seed", *v);
    if (const auto* v = val("run", "format")) {
        if (*v == "csv")
            cfg.format = OutputFormat::Csv;
        else if (*v == "json")
            cfg.format = OutputFormat::Json;
        else
            invalid("run.format", "csv or json");
    }
    if (const auto* v = val("run", "grid")) cfg.grid = to_list("run.grid", *v);
    if (const auto* v = val("run", "L")) cfg.L = static_cast<int>(to_int("run.L", *v));
    if (const auto* v = val("run", "steps")) cfg.steps = to_int("run.steps", *v);
    if (const auto* v = val("run", "realizations")) cfg.realizations = static_cast<int>(to_int("run.realizations", *v));
    if (const auto* v = val("run", "reorth")) cfg.reorth = static_cast<int>(to_int("run.reorth", *v));
    if (const auto* v = val("run", "burn_in")) cfg.burn_in = to_int("run.burn_in", *v);
    if (sections.count("model")) cfg.model = build_model(sections.at("model"));
    if (const auto* v = val("furstenberg", "svd_tol")) cfg.svd_tol = to_double("furstenberg.svd_tol", *v);
    if (const auto* v = val("furstenberg", "d_O")) cfg.d_O = to_double("furstenberg.d_O", *v);
    if (const auto* v = val("zipper-check", "samples")) cfg.samples = static_cast<int>(to_int("zipper-check.samples", *v));
    if (const auto* v = val("zipper-check", "svd_tol")) cfg.svd_tol = to_double("zipper-check.svd_tol", *v);
    if (const auto* v = val("wegner", "energy")) cfg.wegner_energy = to_double("wegner.energy", *v);
    if (const auto* v = val("wegner", "kappa")) cfg.kappa = to_double("wegner.kappa", *v);
    if (const auto* v = val("wegner", "beta")) cfg.beta = to_double("wegner.beta", *v);
    if (const auto* v = val("wegner", "xi")) cfg.xi = to_double("wegner.xi", *v);
    if (const auto* v = val("wegner", "trials")) cfg.trials = static_cast<int>(to_int("wegner.trials", *v));
    if (const auto* v = val("wegner", "L_list")) {
        cfg.L_list.clear();
        for (double x : to_list("wegner.L_list", *v)) {
            if (x != std::floor(x)) invalid("wegner.L_list", "integers expected");
            cfg.L_list.push_back(static_cast<int>(x));
        }
    }
    if (const auto* v = val("eigenmode", "window")) {
        const auto w = to_list("eigenmode.window", *v);
        if (w.size() != 2) invalid("eigenmode.window", "expected lo, hi");
        cfg.window_lo = w[0];
        cfg.window_hi = w[1];
    }
    if (const auto* v = val("transport", "t_grid")) cfg.t_grid = to_list("transport.t_grid", *v);
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    if (cfg.steps < 1000) invalid("run.steps", "n >= 1000");
    if (cfg.realizations < 1) invalid("run.realizations", "R >= 1");
    if (cfg.reorth < 1 || cfg.reorth > 50) invalid("run.reorth", "1 <= k <= 50");
    if (cfg.burn_in < 0) invalid("run.burn_in", "burn_in >= 0");
    if (cfg.L < 1) invalid("run.L", "L >= 1");
    if (!(cfg.svd_tol > 0.0 && cfg.svd_tol < 1.0)) invalid("svd_tol", "0 < svd_tol < 1");
    if (cfg.task == Task::Selftest) return;
    if (!cfg.model) invalid("model", "a [model] section is required for task " + to_string(cfg.task));
    const ModelSpec& m = *cfg.model;
    const bool unitary = is_unitary_family(m);
    auto need_family = [&](bool ok, const std::string& what) {
        if (!ok) invalid("model.family", "task " + to_string(cfg.task) + " needs " + what);
    };
    auto need_grid = [&](std::size_t min) {
        if (cfg.grid.size() < min) invalid("run.grid", "at least " + std::to_string(min) + " points");
    };
    switch (cfg.task) {
    case Task::LyapScan:
        need_family(!std::holds_alternative<ExtendedCMV>(m), "a family with transfer matrices (not cmv)");
        need_grid(1);
        break;
    case Task::Ids:
        need_family(std::holds_alternative<DiscreteQuasi1D>(m) || std::holds_alternative<UnitaryAnderson>(m) ||
                        std::holds_alternative<ExtendedCMV>(m),
                    "discrete, unitary-anderson or cmv");
        need_grid(1);
        if (cfg.L < 8) invalid("run.L", "L >= 8");
        if (cfg.realizations < 4) invalid("run.realizations", "R >= 4");
        for (std::size_t k = 1; k < cfg.grid.size(); ++k)
            if (cfg.grid[k] < cfg.grid[k - 1]) invalid("run.grid", "must be ordered");
        break;
    case Task::Furstenberg: {
        need_family(std::holds_alternative<DiscreteQuasi1D>(m) || std::holds_alternative<ContinuousQuasi1D>(m),
                    "discrete or continuous");
        const int D = model_dimension(m);
        if (D > 8) invalid("model.D", "D <= 8 for the 2^D generator enumeration");
        need_grid(1);
        if (cfg.d_O && !(*cfg.d_O > 0.0)) invalid("furstenberg.d_O", "d_O > 0");
        break;
    }
    case Task::ZipperCheck:
        need_family(std::holds_alternative<ScatteringZipper>(m), "zipper");
        if (cfg.samples < 1) invalid("zipper-check.samples", "samples >= 1");
        break;
    case Task::Thouless:
        need_family(std::holds_alternative<DiscreteQuasi1D>(m) && model_dimension(m) == 1, "discrete with D = 1");
        need_grid(2);
        if (cfg.L < 8) invalid("run.L", "L >= 8");
        if (cfg.realizations < 2) invalid("run.realizations", "R >= 2");
        break;
    case Task::Wegner:
        need_family(std::holds_alternative<DiscreteQuasi1D>(m), "discrete");
        if (!(cfg.kappa > 0.0)) invalid("wegner.kappa", "kappa > 0");
        if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) invalid("wegner.beta", "beta in (0,1)");
        if (cfg.trials < 200) invalid("wegner.trials", "R >= 200 per L");
        if (cfg.L_list.empty()) invalid("wegner.L_list", "at least one L");
        for (int L : cfg.L_list)
            if (L < 1) invalid("wegner.L_list", "L >= 1");
        break;
    case Task::Eigenmode:
        need_family(std::holds_alternative<DiscreteQuasi1D>(m), "discrete");
        if (!(cfg.window_lo < cfg.window_hi)) invalid("eigenmode.window", "lo < hi");
        if (cfg.L < 8) invalid("run.L", "L >= 8");
        break;
    case Task::Transport:
        need_family(std::holds_alternative<DiscreteQuasi1D>(m), "discrete");
        if (cfg.t_grid.empty()) invalid("transport.t_grid", "at least one time");
        for (double t : cfg.t_grid)
            if (t < 0.0) invalid("transport.t_grid", "t >= 0");
        if (cfg.L < 12) invalid("run.L", "L >= 12");
        break;
    case Task::Selftest:
        break;
    }
    (void)unitary;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[run]\n";
    os << "task = " << to_string(cfg.task) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "format = " << (cfg.format == OutputFormat::Csv ? "csv" : "json") << "\n";
    if (!cfg.grid.empty()) os << "grid = " << list_text(cfg.grid) << "\n";
    os << "L = " << cfg.L << "\n";
    os << "steps = " << cfg.steps << "\n";
    os << "realizations = " << cfg.realizations << "\n";
    os << "reorth = " << cfg.reorth << "\n";
    os << "burn_in = " << cfg.burn_in << "\n";
    if (cfg.model) {
        os << "\n[model]\n";
        os << "family = " << family_name(*cfg.model) << "\n";
        std::visit(
            [&os](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                auto laws = [&os](const std::vector<DisorderLaw>& ls) {
                    os << "law = ";
                    for (std::size_t k = 0; k < ls.size(); ++k) os << (k ? "; " : "") << law_text(ls[k]);
                    os << "\n";
                };
                if constexpr (std::is_same_v<T, UnitaryAnderson>) {
                    os << "r = " << format_double(m.r) << "\nt = " << format_double(m.t) << "\n";
                    os << "phase_law = " << law_text(m.phase_law) << "\n";
                } else if constexpr (std::is_same_v<T, ScatteringZipper>) {
                    os << "D = " << m.D << "\nalpha = " << matrix_text(m.alpha) << "\n";
                } else if constexpr (std::is_same_v<T, ExtendedCMV>) {
                    os << "verblunsky = ";
                    for (std::size_t k = 0; k < m.law.values.size(); ++k)
                        os << (k ? ", " : "") << complex_text(m.law.values[k]) << ":" << format_double(m.law.weights[k]);
                    os << "\n";
                } else {
                    os << "D = " << m.D << "\n";
                    if (m.V0.size() != 0) os << "V0 = " << matrix_text(m.V0) << "\n";
                    if constexpr (std::is_same_v<T, DiscreteQuasi1D>) os << "lambda = " << format_double(m.lambda) << "\n";
                    if constexpr (std::is_same_v<T, ContinuousQuasi1D>) os << "ell = " << format_double(m.ell) << "\n";
                    if constexpr (!std::is_same_v<T, DiscreteQuasi1D>) os << "c = " << list_text(m.c) << "\n";
                    laws(m.laws);
                }
            },
            *cfg.model);
    }
    os << "\n[furstenberg]\nsvd_tol = " << format_double(cfg.svd_tol) << "\n";
    if (cfg.d_O) os << "d_O = " << format_double(*cfg.d_O) << "\n";
    os << "\n[zipper-check]\nsamples = " << cfg.samples << "\n";
    os << "\n[wegner]\nenergy = " << format_double(cfg.wegner_energy) << "\nkappa = " << format_double(cfg.kappa)
       << "\nbeta = " << format_double(cfg.beta) << "\nxi = " << format_double(cfg.xi)
       << "\nL_list = " << list_text(cfg.L_list) << "\ntrials = " << cfg.trials << "\n";
    os << "\n[eigenmode]\nwindow = " << format_double(cfg.window_lo) << ", " << format_double(cfg.window_hi) << "\n";
    os << "\n[transport]\nt_grid = " << list_text(cfg.t_grid) << "\n";
    return os.str();
}

}  // namespace q1d
