#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurgery/experiment.hpp"
#include "qsurgery/noise.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace qsurgery;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void set_err(DecodeReport& rep, std::size_t shot, std::size_t obs) {
    rep.err[shot * rep.obs_words() + obs / 64] |= 1ull << (obs % 64);
}

} // namespace

TEST_CASE("injection frame closes the measurement sequence") {
    CHECK(injection_frame(0, 0, 0) == std::pair{0, 0});
    CHECK(injection_frame(1, 0, 1) == std::pair{0, 0});
    CHECK(injection_frame(1, 0, 0) == std::pair{1, 0});
    CHECK(injection_frame(0, 1, 1) == std::pair{1, 1});
    CHECK(injection_frame(1, 1, 0) == std::pair{1, 1});
    CHECK_THROWS_AS(injection_frame(2, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(injection_frame(0, -1, 0), std::invalid_argument);
}

TEST_CASE("power-law fit recovers the generating exponent") {
    std::vector<PowerLawPoint> pts;
    for (double p : {1e-3, 2e-3, 4e-3, 8e-3}) {
        const double pl = 2.0 * p * p * p;
        pts.push_back({p, pl, 0.01 * pl});
    }
    const PowerLawFit fit = fit_power_law(pts);
    CHECK(fit.points == 4);
    CHECK(fit.d_cir == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.alpha == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.sigma_d() > 0.0);

    // Zero-failure points are skipped, not fatal.
    pts.push_back({1.6e-2, 0.0, 0.0});
    const PowerLawFit fit2 = fit_power_law(pts);
    CHECK(fit2.points == 4);
    CHECK(fit2.d_cir == doctest::Approx(fit.d_cir));

    // Multiplicative noise keeps the exponent near truth.
    std::mt19937_64 rng(20260816);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<PowerLawPoint> noisy;
    for (double p : {1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2}) {
        const double pl = 2.0 * std::pow(p, 3.0);
        const double sigma = 0.02 * pl;
        noisy.push_back({p, pl * (1.0 + 0.02 * g(rng)), sigma});
    }
    CHECK(fit_power_law(noisy).d_cir == doctest::Approx(3.0).epsilon(0.05));

    CHECK_THROWS_AS(fit_power_law({{1e-3, 1e-6, 1e-7}, {2e-3, 8e-6, 1e-7}}),
                    std::invalid_argument);
    // Identical p values make the design singular.
    CHECK_THROWS_AS(fit_power_law({{1e-3, 1e-6, 1e-7},
                                   {1e-3, 1e-6, 1e-7},
                                   {1e-3, 1e-6, 1e-7}}),
                    std::invalid_argument);
}

TEST_CASE("event classification is the residual XOR algebra") {
    InjectionExperiment fake;
    fake.obs_z = {0, 1};
    fake.obs_oc = {2, 3};
    fake.obs_x = {4, 5};

    DecodeReport rep;
    rep.shots = 4;
    rep.num_observables = 6;
    rep.err.assign(rep.shots * rep.obs_words(), 0);
    rep.covered.assign(6, 1);
    set_err(rep, 1, 0);            // Z residual alone -> A fires
    set_err(rep, 2, 0);            // Z and oc residuals together cancel
    set_err(rep, 2, 2);
    set_err(rep, 3, 3);            // oc residual alone on the second pair -> B
    set_err(rep, 2, 4);            // x-side residual -> C

    const EventStream ez = classify_events(fake, rep, PauliBasis::z);
    REQUIRE(ez.names == std::vector<std::string>{"A", "B"});
    CHECK(ez.bits[0] == std::vector<std::uint8_t>{0, 1, 0, 0});
    CHECK(ez.bits[1] == std::vector<std::uint8_t>{0, 0, 0, 1});

    const EventStream ex = classify_events(fake, rep, PauliBasis::x);
    REQUIRE(ex.names == std::vector<std::string>{"C", "D"});
    CHECK(ex.bits[0] == std::vector<std::uint8_t>{0, 0, 1, 0});
    CHECK(ex.bits[1] == std::vector<std::uint8_t>{0, 0, 0, 0});

    DecodeReport uncovered = rep;
    uncovered.covered[2] = 0;
    CHECK_THROWS_AS(classify_events(fake, uncovered, PauliBasis::z),
                    std::invalid_argument);
}

TEST_CASE("independence statistic separates independent from correlated streams") {
    const std::size_t n = 100000;
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.01);
    std::vector<std::uint8_t> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = coin(rng);
        b[i] = coin(rng);
        c[i] = a[i]; // perfectly correlated copy
    }

    const PairIndependence ind = independence_pair("AB", a, b);
    CHECK(ind.sufficient);
    CHECK(std::fabs(ind.z) < 4.0); // a null draw; 4 sigma leaves huge margin
    CHECK(ind.p_first == doctest::Approx(0.01).epsilon(0.2));
    CHECK(ind.wilson_first[0] < ind.p_first);
    CHECK(ind.wilson_first[1] > ind.p_first);
    CHECK(ind.wilson_first[1] - ind.wilson_first[0] < 0.002);

    const PairIndependence cor = independence_pair("AC", a, c);
    CHECK(cor.sufficient);
    CHECK(cor.z > 5.0);
    CHECK(cor.n_both == cor.n_first);

    std::vector<std::uint8_t> silent(n, 0);
    const PairIndependence none = independence_pair("AS", a, silent);
    CHECK_FALSE(none.sufficient);
    CHECK(none.z == 0.0);

    EventStream ev;
    ev.names = {"A", "B", "C", "D"};
    ev.shots = n;
    ev.bits = {a, b, a, c};
    const auto rows = independence_report(ev);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].pair == "AB");
    CHECK(rows[1].pair == "CD");
    CHECK(rows[1].z > 5.0);

    CHECK_THROWS_AS(independence_pair("bad", a, {0, 1}), std::invalid_argument);
}

TEST_CASE("code specs build the documented families") {
    const CssCode sur = make_code({"surface", 3, 0, 0, {}, {}});
    CHECK(sur.k() == 1);
    CHECK(sur.validate().empty());

    const CssCode rep = make_code({"repetition", 4, 0, 0, {}, {}});
    CHECK(rep.n() == 4);
    CHECK(rep.k() == 1);
    CHECK(rep.h_x.rows() == 0);
    CHECK(rep.h_z.rows() == 3);
    CHECK(rep.validate().empty());

    const CssCode bb = make_code(
        {"bb", 0, 3, 3, {{0, 0}, {0, 1}, {1, 0}}, {{0, 0}, {0, 1}, {2, 1}}});
    CHECK(bb.n() == 18);
    CHECK(bb.k() == 4);
    CHECK(bb.validate().empty());

    CHECK_THROWS_AS(make_code({"steane", 7, 0, 0, {}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(make_code({"repetition", 1, 0, 0, {}, {}}), std::invalid_argument);
}

TEST_CASE("config parsing, canonical form, and hash are stable") {
    const std::string text = R"({
        "mode": "surgery",
        "register": {"family": "bb", "l": 3, "m": 3,
                     "a": [[0,0],[0,1],[1,0]], "b": [[0,0],[0,1],[2,1]]},
        "noisy": {"family": "surface", "d": 2},
        "q": 2, "d_r": 4, "d_t": 4, "prep": "z",
        "p": [0.005, 0.01, 0.02],
        "shots": 100000, "seed": 7, "workers": 4
    })";
    const ExperimentConfig cfg = parse_config_json(text);
    CHECK(cfg.mode == "surgery");
    CHECK(cfg.register_code.family == "bb");
    CHECK(cfg.register_code.l == 3);
    CHECK(cfg.register_code.a.size() == 3);
    CHECK(cfg.noisy_code.d == 2);
    CHECK(cfg.q == 2);
    CHECK(cfg.d_r == 4);
    CHECK(cfg.prep == PauliBasis::z);
    REQUIRE(cfg.ps.size() == 3);
    CHECK(cfg.ps[1] == 0.01);
    CHECK(cfg.shots == 100000);
    CHECK(cfg.workers == 4);

    // Whitespace and key order never change the canonical form.
    const std::string shuffled =
        R"({"workers":4,"seed":7,"shots":100000,"p":[0.005,0.01,0.02],"prep":"z",)"
        R"("d_t":4,"d_r":4,"q":2,"noisy":{"d":2,"family":"surface"},)"
        R"("register":{"b":[[0,0],[0,1],[2,1]],"a":[[0,0],[0,1],[1,0]],"m":3,"l":3,)"
        R"("family":"bb"},"mode":"surgery"})";
    const ExperimentConfig cfg2 = parse_config_json(shuffled);
    CHECK(canonical_config(cfg) == canonical_config(cfg2));
    CHECK(config_hash(cfg) == config_hash(cfg2));

    ExperimentConfig tweaked = cfg;
    tweaked.seed = 8;
    CHECK(config_hash(tweaked) != config_hash(cfg));

    auto rejects = [](const std::string& body, const std::string& field) {
        try {
            parse_config_json(body);
            FAIL_CHECK("expected rejection mentioning " << field);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    rejects(R"({"mode": "teleport"})", "mode");
    rejects(R"({"mode": "memory", "p": [0.5]})", "p");
    rejects(R"({"mode": "memory", "p": [0.01], "prep": "y"})", "prep");
    rejects(R"({"mode": "surgery", "p": [0.01]})", "q");
    rejects(R"({"mode": "memory"})", "p");
    rejects(R"({"mode": "distill"})", "distill");
    rejects("not json", "JSON");
}

TEST_CASE("parallel decoding is byte-identical for any worker count") {
    const CssCode code = make_surface(2);
    const Circuit c = build_memory_circuit(code, 2, PauliBasis::z);
    const NoisyCircuit nc = apply_noise(c, NoiseModel{0.004});
    const DetectorModel dm = derive_detector_model(nc);
    const ShotBatch batch = sample_model(dm, 3000, 99);

    const DecodeReport r1 = decode_shots_parallel(dm, batch, PauliBasis::z, 1);
    const DecodeReport r4 = decode_shots_parallel(dm, batch, PauliBasis::z, 4);
    const DecodeReport r9 = decode_shots_parallel(dm, batch, PauliBasis::z, 9);
    CHECK(r1.err == r4.err);
    CHECK(r1.err == r9.err);
    REQUIRE(r1.stats.size() == r4.stats.size());
    for (std::size_t i = 0; i < r1.stats.size(); ++i)
        CHECK(r1.stats[i].failures == r4.stats[i].failures);

    // And it agrees with the sequential decoder on the same side.
    const DecodeReport both = decode_shots(dm, batch);
    for (const auto& st : r1.stats) {
        bool found = false;
        for (const auto& ref : both.stats)
            if (ref.name == st.name) {
                found = true;
                CHECK(ref.failures == st.failures);
            }
        CHECK(found);
    }
}

TEST_CASE("memory runs at zero rate are silent and artifacts carry provenance") {
    ExperimentConfig cfg;
    cfg.mode = "memory";
    cfg.register_code = {"surface", 2, 0, 0, {}, {}};
    cfg.ps = {0.0};
    cfg.shots = 400;
    cfg.rounds = 2;
    cfg.seed = 11;

    const std::string dir = "build/test_artifacts/mem0";
    std::filesystem::remove_all(dir);
    const RunResult res = run_config(cfg, dir);

    REQUIRE(!res.gates.items.empty());
    bool saw_gate = false;
    for (const auto& item : res.gates.items)
        if (item.name.find("p=0") != std::string::npos) {
            saw_gate = true;
            CHECK(item.pass);
        }
    CHECK(saw_gate);

    REQUIRE(!res.files.empty());
    for (const auto& f : res.files) {
        const std::string body = slurp(dir + "/" + f);
        CHECK(body.rfind("# qsurgery artifact\n# config_hash=", 0) == 0);
        CHECK(body.find("# seed=11\n") != std::string::npos);
    }
    const std::string stats = slurp(dir + "/memory.csv");
    CHECK(stats.find("p,observable,shots,failures,p_L,sigma") != std::string::npos);
    // Every data row reports zero failures.
    std::istringstream lines(stats);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'p') continue;
        CHECK(line.find(",400,0,") != std::string::npos);
    }
}

TEST_CASE("surgery runs produce artifacts, events, and identical reruns") {
    ExperimentConfig cfg;
    cfg.mode = "surgery";
    cfg.register_code = {"bb", 0, 3, 3, {{0, 0}, {0, 1}, {1, 0}},
                         {{0, 0}, {0, 1}, {2, 1}}};
    cfg.noisy_code = {"surface", 2, 0, 0, {}, {}};
    cfg.q = 2;
    cfg.d_r = 2;
    cfg.d_t = 2;
    cfg.ps = {0.002, 0.005, 0.01};
    cfg.shots = 300;
    cfg.seed = 5;
    cfg.workers = 2;

    const std::string dir = "build/test_artifacts/surg";
    std::filesystem::remove_all(dir);
    const RunResult res = run_config(cfg, dir);

    for (const char* name : {"surgery.csv", "events.csv", "surgery_fits.csv",
                             "memory.csv", "memory_fits.csv", "comparison.csv"}) {
        CAPTURE(name);
        CHECK(std::filesystem::exists(dir + "/" + name));
    }
    CHECK(res.events.size() == cfg.ps.size()); // one AB row per rate
    for (const auto& ev : res.events) CHECK(ev.pair == "AB");

    bool has_surgery_fit = false, has_memory_fit = false;
    for (const auto& [label, fit] : res.fits) {
        if (label == "surgery:idle") has_surgery_fit = true;
        if (label == "memory:idle") has_memory_fit = true;
        CHECK(fit.points >= 3);
    }
    // With only 300 shots some legs may land at zero failures for the
    // smallest rate; the fit then covers fewer points and is skipped, so
    // only assert fits that were actually produced are sane. The comparison
    // gate must exist either way.
    bool saw_cmp = false;
    for (const auto& item : res.gates.items)
        if (item.name.find("idle d_cir") != std::string::npos) saw_cmp = true;
    CHECK(saw_cmp);
    (void)has_surgery_fit;
    (void)has_memory_fit;

    // Bitwise determinism: an identical config, fresh directory, and a
    // different worker count reproduce every artifact byte for byte.
    ExperimentConfig cfg2 = cfg;
    cfg2.workers = 5;
    const std::string dir2 = "build/test_artifacts/surg_rerun";
    std::filesystem::remove_all(dir2);
    const RunResult res2 = run_config(cfg2, dir2);
    REQUIRE(res.files == res2.files);
    for (const auto& f : res.files) {
        CAPTURE(f);
        CHECK(slurp(dir + "/" + f) == slurp(dir2 + "/" + f));
    }
}

TEST_CASE("the hidden control channel induces strong event correlation") {
    ExperimentConfig cfg;
    cfg.mode = "surgery";
    cfg.register_code = {"bb", 0, 3, 3, {{0, 0}, {0, 1}, {1, 0}},
                         {{0, 0}, {0, 1}, {2, 1}}};
    cfg.noisy_code = {"surface", 2, 0, 0, {}, {}};
    cfg.q = 2;
    cfg.d_r = 2;
    cfg.d_t = 2;
    cfg.ps = {0.003};
    cfg.shots = 2000;
    cfg.seed = 17;
    cfg.workers = 2;
    cfg.control_p = 0.05;

    const std::string dir = "build/test_artifacts/surg_ctrl";
    std::filesystem::remove_all(dir);
    const RunResult res = run_config(cfg, dir);
    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].sufficient);
    CHECK(res.events[0].z > 5.0);
}

TEST_CASE("audit mode writes a machine-readable report") {
    ExperimentConfig cfg;
    cfg.mode = "audit";
    cfg.register_code = {"surface", 2, 0, 0, {}, {}};
    cfg.noisy_code = {"surface", 2, 0, 0, {}, {}};
    cfg.q = 1;
    cfg.d_r = 2;
    cfg.d_t = 2;
    cfg.audit_cap = 4;

    const std::string dir = "build/test_artifacts/audit";
    std::filesystem::remove_all(dir);
    const RunResult res = run_config(cfg, dir);
    CHECK(std::filesystem::exists(dir + "/audit.json"));
    CHECK(res.gates.all_pass());
    const std::string body = slurp(dir + "/audit.json");
    CHECK(body.find("\"items\"") != std::string::npos);
    CHECK(body.find("\"entries\"") != std::string::npos);
}

TEST_CASE("distill mode writes sweep tables") {
    ExperimentConfig cfg;
    cfg.mode = "distill";
    cfg.distill_q = {0.002, 0.004, 0.008};
    cfg.distill_r = {0.0, 1.0};

    const std::string dir = "build/test_artifacts/distill";
    std::filesystem::remove_all(dir);
    const RunResult res = run_config(cfg, dir);
    CHECK(res.gates.all_pass());
    const std::string rows = slurp(dir + "/distill.csv");
    CHECK(rows.find("q,r,success_prob,error_rate") != std::string::npos);
    const std::string slopes = slurp(dir + "/distill_slopes.csv");
    CHECK(slopes.find("r,slope,points") != std::string::npos);
}
