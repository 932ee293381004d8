#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "q1d/config.hpp"
#include "q1d/errors.hpp"

using namespace q1d;

namespace {

const char* kMinimal = R"([run]
task = lyap-scan
grid = 2.5, 3.0

[model]
family = discrete
lambda = 0
)";

ErrorKind kind_of(const std::string& text, std::string* msg = nullptr) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        if (msg) *msg = e.what();
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::ParseError;
}

}  // namespace

TEST_CASE("minimal lyap-scan config fills defaults") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.task == Task::LyapScan);
    CHECK(c.realizations == 16);
    CHECK(c.reorth == 10);
    CHECK(c.burn_in == 1000);
    CHECK(c.steps == 1000000);
    CHECK(c.seed == 0);
    CHECK(c.format == OutputFormat::Csv);
    REQUIRE(c.grid.size() == 2);
    CHECK(c.grid[1] == 3.0);
    const auto& m = std::get<DiscreteQuasi1D>(*c.model);
    CHECK(m.D == 1);
    CHECK(m.lambda == 0.0);
    CHECK(m.laws.size() == 1);
}

TEST_CASE("r^2 + t^2 constraint is named") {
    std::string msg;
    const auto k = kind_of(R"([run]
task = lyap-scan
grid = 0.5
[model]
family = unitary-anderson
r = 0.6
t = 0.7348469228349535
)",
                           &msg);
    CHECK(k == ErrorKind::ValidationError);
    CHECK(msg.find("r^2+t^2=1") != std::string::npos);
}

TEST_CASE("duplicate key reports its line") {
    std::string msg;
    const auto k = kind_of("[run]\ntask = ids\n# comment\nL = 50\nL = 60\n", &msg);
    CHECK(k == ErrorKind::ParseError);
    CHECK(msg.find("line 5") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
}

TEST_CASE("malformed and unknown input") {
    CHECK(kind_of("[run\ntask = ids\n") == ErrorKind::ParseError);
    CHECK(kind_of("task = ids\n") == ErrorKind::ParseError);
    CHECK(kind_of("[run]\ntask ids\n") == ErrorKind::ParseError);
    CHECK(kind_of("[run]\ntask = ids\nbogus = 1\n") == ErrorKind::UnknownKey);
    CHECK(kind_of("[nowhere]\n") == ErrorKind::UnknownKey);
    // family-specific key on the wrong family
    CHECK(kind_of(std::string(kMinimal) + "ell = 2\n") == ErrorKind::UnknownKey);
    CHECK(kind_of("[run]\ntask = nope\n") == ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = 1\nsteps = 10\n[model]\nfamily = discrete\n") ==
          ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = x\n[model]\nfamily = discrete\n") == ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = 1\n") == ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = 1\n[model]\nfamily = discrete\nD = 2\nV0 = 0 1; 2 0\n") ==
          ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = 1\n[model]\nfamily = discrete\nlaw = bernoulli(1.5)\n") ==
          ErrorKind::ValidationError);
}

TEST_CASE("task-specific preconditions") {
    CHECK(kind_of("[run]\ntask = ids\ngrid = 0\nL = 4\n[model]\nfamily = discrete\n") == ErrorKind::ValidationError);
    CHECK(kind_of("[run]\ntask = lyap-scan\ngrid = 0\n[model]\nfamily = cmv\nverblunsky = 0.5:1\n") ==
          ErrorKind::ValidationError);
    CHECK_NOTHROW(parse_config("[run]\ntask = selftest\n"));
}

TEST_CASE("grid helpers") {
    const RunConfig c = parse_config(
        "[run]\ntask = thouless\ngrid = linspace(-1, 1, 5)\n[model]\nfamily = discrete\n"
        "[transport]\nt_grid = logspace(0, 2, 3)\n");
    REQUIRE(c.grid.size() == 5);
    CHECK(c.grid[0] == -1.0);
    CHECK(c.grid[2] == 0.0);
    CHECK(c.grid[4] == 1.0);
    REQUIRE(c.t_grid.size() == 3);
    CHECK(c.t_grid[1] == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(parse_config(kMinimal).t_grid.size() == 21);
}

TEST_CASE("round trip through serialize") {
    const char* texts[] = {
        kMinimal,
        "[run]\ntask = furstenberg\nseed = 18446744073709551615\ngrid = 0.1, -0.3\nformat = json\n"
        "[model]\nfamily = continuous\nD = 2\nV0 = 0 1; 1 0\nell = 0.75\nc = 1, -2.5\n"
        "law = uniform(-1, 1); finite(0:0.25, 1:0.5, 3:0.25)\n[furstenberg]\nd_O = 0.1\n",
        "[run]\ntask = zipper-check\ngrid = 0.3\n[model]\nfamily = zipper\nD = 2\n"
        "alpha = 0.3+0.1i 0; -0.2i 0.25\n[zipper-check]\nsamples = 50\n",
        "[run]\ntask = ids\ngrid = -1, 0, 1\nL = 60\n[model]\nfamily = unitary-anderson\n"
        "r = 0.6\nt = 0.8\nphase_law = two-point(0, 1.3, 0.3)\n",
        "[run]\ntask = ids\ngrid = 0\n[model]\nfamily = cmv\nverblunsky = 0.5:1, -0.25+0.5i:3\n",
        "[run]\ntask = wegner\n[model]\nfamily = discrete\nlaw = bernoulli(0.3)\n"
        "[wegner]\nenergy = 0.25\nL_list = 20, 40\ntrials = 200\n",
        "[run]\ntask = lyap-scan\ngrid = 1.5\n[model]\nfamily = point\nD = 2\nc = 1, 1\n"
        "[eigenmode]\nwindow = -0.5, 0.5\n",
        "[run]\ntask = transport\nL = 150\n[model]\nfamily = discrete\nlambda = 4\n[transport]\nt_grid = 0, 5, 10\n",
    };
    for (const char* t : texts) {
        const std::string text = t;
        CAPTURE(text);
        const RunConfig a = parse_config(t);
        const std::string s = serialize_config(a);
        const RunConfig b = parse_config(s);
        CHECK(a == b);
        CHECK(serialize_config(b) == s);
    }
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double17(0.1) == "0.10000000000000001");
    CHECK(format_double17(3.0) == "3");
    for (double x : {1.0 / 3.0, 2.0e17, -7.25e-9}) CHECK(std::stod(format_double17(x)) == x);
}
