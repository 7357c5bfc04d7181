#include "hyperqst/apparatus.hpp"
#include "hyperqst/errors.hpp"
#include "hyperqst/linalg.hpp"
#include "hyperqst/rng.hpp"
#include "hyperqst/state_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

using namespace hyperqst;

namespace {

// independent oracle: J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt,
// composite Simpson rule
double bessel_integral(int n, double x) {
    const int steps = 20000; // even
    const double h = M_PI / steps;
    auto f = [&](double t) { return std::cos(n * t - x * std::sin(t)); };
    double acc = f(0.0) + f(M_PI);
    for (int i = 1; i < steps; ++i) acc += f(i * h) * ((i & 1) ? 4.0 : 2.0);
    return acc * h / 3.0 / M_PI;
}

// independent oracle: build both arm operators as explicit matrix products
// (projector sandwich) instead of extracting a single row
CMat brute_freq_povm(const MeasurementSetting& s, int d, const TruncationPolicy& trunc) {
    int g = trunc.guard_bins;
    int n = d + 2 * g;
    CMat ui = eom_transfer(s.idler_eom, n, trunc);
    CMat us = eom_transfer(s.signal_eom, n, trunc);
    CMat emb_i = CMat::Zero(n, d), emb_s = CMat::Zero(n, d);
    for (int j = 0; j < d; ++j) {
        emb_i(g + j, j) = std::exp(Cplx(0.0, s.mask.idler_phases(j)));
        emb_s(g + j, j) = std::exp(Cplx(0.0, s.mask.signal_phases(j)));
    }
    CMat proj_i = CMat::Zero(n, n), proj_s = CMat::Zero(n, n);
    proj_i(g + s.out_idler, g + s.out_idler) = 1.0;
    proj_s(g + s.out_signal, g + s.out_signal) = 1.0;
    CMat mi = ui * emb_i;
    CMat ms = us * emb_s;
    CMat ai = mi.adjoint() * proj_i * mi; // d x d
    CMat as = ms.adjoint() * proj_s * ms;
    return tensor(ai, as);
}

MeasurementSetting random_setting(int d, Rng& rng) {
    MeasurementSetting s;
    const char labels[6] = {'H', 'V', 'D', 'A', 'R', 'L'};
    s.pol.idler = labels[rng.raw() % 6];
    s.pol.signal = labels[rng.raw() % 6];
    s.mask.idler_phases = RVec(d);
    s.mask.signal_phases = RVec(d);
    for (int j = 0; j < d; ++j) {
        s.mask.idler_phases(j) = rng.uniform(0.0, 2.0 * M_PI);
        s.mask.signal_phases(j) = rng.uniform(0.0, 2.0 * M_PI);
    }
    s.idler_eom = EomSetting{rng.uniform(0.0, 2.32), rng.uniform(0.0, 2.0 * M_PI)};
    s.signal_eom = EomSetting{rng.uniform(0.0, 2.32), rng.uniform(0.0, 2.0 * M_PI)};
    s.out_idler = static_cast<int>(rng.raw() % d);
    s.out_signal = static_cast<int>(rng.raw() % d);
    s.label = "random";
    return s;
}

} // namespace

TEST_CASE("bessel_j matches the integral representation") {
    for (int n : {0, 1, 2, 3, 5, 8, 10}) {
        for (double x : {0.05, 0.5, 1.0, 1.434695650819563, 2.32, 5.0, 9.7}) {
            CHECK(std::abs(bessel_j(n, x) - bessel_integral(n, x)) <= 1e-10);
        }
    }
}

TEST_CASE("bessel_j reference values") {
    CHECK(bessel_j(0, 1.0) == doctest::Approx(0.7651976865579666).epsilon(1e-12));
    CHECK(bessel_j(1, 1.0) == doctest::Approx(0.4400505857449335).epsilon(1e-12));
    CHECK(bessel_j(0, 1.435) == doctest::Approx(0.547779674777173).epsilon(1e-10));
    CHECK(bessel_j(1, 1.435) == doctest::Approx(0.5479969595345081).epsilon(1e-10));
    CHECK(bessel_j(0, 0.0) == doctest::Approx(1.0));
    CHECK(bessel_j(3, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("bessel_j symmetries") {
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        int n = static_cast<int>(rng.raw() % 11);
        double x = rng.uniform(0.01, 9.9);
        double jn = bessel_j(n, x);
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        CHECK(bessel_j(-n, x) == doctest::Approx(sign * jn).epsilon(1e-12));
        CHECK(bessel_j(n, -x) == doctest::Approx(sign * jn).epsilon(1e-12));
    }
}

TEST_CASE("bessel_j small-argument series") {
    CHECK(bessel_j(0, 1e-8) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(bessel_j(1, 1e-8) == doctest::Approx(5e-9).epsilon(1e-10));
    CHECK(bessel_j(2, 1e-8) == doctest::Approx(1.25e-17).epsilon(1e-8));
}

TEST_CASE("bessel energy sums to one") {
    double x = 2.32;
    double total = bessel_j(0, x) * bessel_j(0, x);
    for (int n = 1; n <= 20; ++n) {
        double jn = bessel_j(n, x);
        total += 2.0 * jn * jn;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bessel_j domain limits") {
    CHECK_THROWS_AS(bessel_j(41, 1.0), ValidationError);
    CHECK_THROWS_AS(bessel_j(0, 10.5), ValidationError);
    CHECK_NOTHROW(bessel_j(40, 10.0));
}

TEST_CASE("hadamard depth crossing point") {
    double root = hadamard_depth();
    CHECK(std::abs(root - 1.434695650819563) < 1e-6);
    CHECK(std::abs(std::abs(bessel_j(0, root)) - std::abs(bessel_j(1, root))) < 1e-9);
    CHECK(std::round(root * 1000.0) / 1000.0 == doctest::Approx(1.435));
    CHECK(bessel_j(0, root) == doctest::Approx(0.5479464495172808).epsilon(1e-9));
}

TEST_CASE("eom transfer entries follow the Bessel sideband rule") {
    TruncationPolicy trunc;
    EomSetting eom{1.7, 0.6};
    int n = 3 + 2 * trunc.guard_bins;
    CMat u = eom_transfer(eom, n, trunc);
    REQUIRE(u.rows() == n);
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int m = static_cast<int>(rng.raw() % n);
        int k = static_cast<int>(rng.raw() % n);
        Cplx expected = std::abs(m - k) > 40
                            ? Cplx(0.0, 0.0)
                            : bessel_j(m - k, eom.depth) *
                                  std::exp(Cplx(0.0, (m - k) * eom.rf_phase));
        CHECK(std::abs(u(m, k) - expected) <= 1e-12);
    }
}

TEST_CASE("eom transfer at zero depth is the identity") {
    TruncationPolicy trunc;
    CMat u = eom_transfer(EomSetting{0.0, 0.3}, 10, trunc);
    CHECK((u - CMat::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("eom transfer is unitary on the guarded computational columns") {
    TruncationPolicy trunc;
    for (double depth : {0.7, 1.434695650819563, 2.32}) {
        int d = 3, g = trunc.guard_bins;
        int n = d + 2 * g;
        CMat u = eom_transfer(EomSetting{depth, 1.1}, n, trunc);
        CMat block = u.middleCols(g, d); // columns with full guard distance
        CMat gram = block.adjoint() * block;
        CHECK((gram - CMat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("crossing-depth transfer has the balanced-splitter central block") {
    TruncationPolicy trunc;
    int d = 2, g = trunc.guard_bins;
    int n = d + 2 * g;
    double depth = hadamard_depth();
    CMat u = eom_transfer(EomSetting{depth, 0.0}, n, trunc);
    double j0 = bessel_j(0, depth), j1 = bessel_j(1, depth);
    CHECK(u(g, g).real() == doctest::Approx(j0));
    CHECK(u(g, g + 1).real() == doctest::Approx(-j1));
    CHECK(u(g + 1, g).real() == doctest::Approx(j1));
    CHECK(u(g + 1, g + 1).real() == doctest::Approx(j0));
    CHECK(j0 == doctest::Approx(j1).epsilon(1e-9)); // balanced at the crossing
    CHECK(j0 == doctest::Approx(0.548).epsilon(1e-3));
}

TEST_CASE("eom transfer finite section is a contraction") {
    TruncationPolicy trunc;
    for (double depth : {0.9, 2.32}) {
        int n = 3 + 2 * trunc.guard_bins;
        CMat u = eom_transfer(EomSetting{depth, 0.4}, n, trunc);
        Eigen::JacobiSVD<CMat> svd(u);
        CHECK(svd.singularValues()(0) <= 1.0 + 1e-9);
    }
}

TEST_CASE("truncation policy rejects insufficient guard bands") {
    TruncationPolicy tight;
    tight.guard_bins = 2;
    CHECK_THROWS_AS(eom_transfer(EomSetting{2.32, 0.0}, 7, tight), ValidationError);
    TruncationPolicy ok;
    CHECK_NOTHROW(eom_transfer(EomSetting{2.32, 0.0}, 3 + 2 * ok.guard_bins, ok));
}

TEST_CASE("shaper operator is the expected diagonal phase") {
    int d = 3;
    ShaperMask mask = zero_mask(d);
    mask.idler_phases << 0.1, 0.2, 0.3;
    mask.signal_phases << 1.0, 2.0, 3.0;
    CMat s = shaper_operator(mask);
    REQUIRE(s.rows() == 9);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            Cplx expected = std::exp(Cplx(0.0, mask.idler_phases(j) + mask.signal_phases(k)));
            CHECK(std::abs(s(j * d + k, j * d + k) - expected) < 1e-15);
        }
    CHECK(s.cwiseAbs().sum() == doctest::Approx(9.0)); // diagonal only
}

TEST_CASE("pol projectors and bras agree") {
    const char labels[6] = {'H', 'V', 'D', 'A', 'R', 'L'};
    for (char a : labels)
        for (char b : labels) {
            PolProjectorSetting p{a, b};
            CMat proj = pol_projector(p);
            CVec bra = pol_bra(p);
            CHECK(std::abs(proj.trace().real() - 1.0) < 1e-14);
            CHECK((proj * proj - proj).cwiseAbs().maxCoeff() < 1e-14);
            CMat outer = bra.conjugate() * bra.transpose();
            CHECK((outer - proj).cwiseAbs().maxCoeff() < 1e-14);
        }
}

TEST_CASE("frequency POVM element matches the brute-force operator product") {
    Rng rng(314159);
    TruncationPolicy trunc;
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 6; ++trial) {
            MeasurementSetting s = random_setting(d, rng);
            CMat fast = freq_povm_element(s, d, trunc);
            CMat slow = brute_freq_povm(s, d, trunc);
            CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("frequency POVM element is rank one and bounded") {
    Rng rng(2718);
    TruncationPolicy trunc;
    for (int d : {2, 3}) {
        MeasurementSetting s = random_setting(d, rng);
        CMat e = freq_povm_element(s, d, trunc);
        auto [w, v] = eig_hermitian(e);
        CHECK(w(w.size() - 1) >= -1e-12);
        CHECK(w(0) <= 1.0 + 1e-9);
        double rank2 = w.size() > 1 ? w(1) : 0.0;
        CHECK(std::abs(rank2) < 1e-12);
    }
}

TEST_CASE("joint povm equals the outer product of the joint kraus row") {
    Rng rng(161803);
    TruncationPolicy trunc;
    for (int d : {2, 3}) {
        MeasurementSetting s = random_setting(d, rng);
        CMat e = joint_povm(s, d, trunc);
        CVec row = joint_kraus_row(s, d, trunc);
        REQUIRE(e.rows() == 4 * d * d);
        REQUIRE(row.size() == 4 * d * d);
        CMat outer = row.conjugate() * row.transpose();
        CHECK((e - outer).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("guard band refinement leaves POVM elements unchanged") {
    Rng rng(55);
    TruncationPolicy base;
    TruncationPolicy wide;
    wide.guard_bins = base.guard_bins + 5;
    for (int d : {2, 3}) {
        MeasurementSetting s = random_setting(d, rng);
        CMat a = freq_povm_element(s, d, base);
        CMat b = freq_povm_element(s, d, wide);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("crossing-depth frequency correlations on the ideal two-bin state") {
    // anti-correlated Bell state in the frequency pair, both EOMs at the
    // crossing depth: the two matched outputs carry 2 J0^2 J1^2 each and the
    // mismatched outputs vanish
    TruncationPolicy trunc;
    int d = 2;
    CVec psi(4);
    psi << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
    CMat rho = psi * psi.adjoint();
    double depth = hadamard_depth();
    auto expect = [&](int oi, int os) {
        MeasurementSetting s;
        s.mask = zero_mask(d);
        s.idler_eom = EomSetting{depth, 0.0};
        s.signal_eom = EomSetting{depth, 0.0};
        s.out_idler = oi;
        s.out_signal = os;
        CMat e = freq_povm_element(s, d, trunc);
        return (e * rho).trace().real();
    };
    double p00 = expect(0, 0), p01 = expect(0, 1), p10 = expect(1, 0), p11 = expect(1, 1);
    CHECK(p00 == doctest::Approx(0.18029449420181565).epsilon(1e-9));
    CHECK(p11 == doctest::Approx(p00).epsilon(1e-12));
    CHECK(std::abs(p01) < 1e-12);
    CHECK(std::abs(p10) < 1e-12);
}

TEST_CASE("bin-basis correlations on the ideal state are anti-correlated") {
    TruncationPolicy trunc;
    for (int d : {2, 3}) {
        HyperStateSpec spec = uniform_spec(d);
        CVec target = build_target(spec);
        CMat rho = target * target.adjoint();
        for (int oi = 0; oi < d; ++oi)
            for (int os = 0; os < d; ++os) {
                MeasurementSetting s;
                s.pol = {'H', 'H'};
                s.mask = zero_mask(d);
                s.out_idler = oi;
                s.out_signal = os;
                CMat e = joint_povm(s, d, trunc);
                double p = (e * rho).trace().real();
                double expected = (os == d - 1 - oi) ? 0.5 / d : 0.0;
                CHECK(std::abs(p - expected) <= 1e-12);
            }
    }
}

TEST_CASE("pol16 set is tomographically complete") {
    const auto& set = pol16_set();
    REQUIRE(set.size() == 16);
    std::set<char> idler, signal;
    for (const auto& p : set) {
        idler.insert(p.idler);
        signal.insert(p.signal);
    }
    CHECK(idler.size() == 6);
    CHECK(signal.size() == 6);

    auto basis = hermitian_basis(4);
    RMat design(16, 16);
    for (int m = 0; m < 16; ++m) {
        CMat proj = pol_projector(set[static_cast<size_t>(m)]);
        for (int i = 0; i < 16; ++i)
            design(m, i) = (proj * basis[static_cast<size_t>(i)]).trace().real();
    }
    Eigen::JacobiSVD<RMat> svd(design);
    CHECK(svd.singularValues()(15) > 0.2);
}

TEST_CASE("qubit protocol structure") {
    auto settings = protocol_qubit128();
    REQUIRE(settings.size() == 128);
    CHECK(settings[0].label == "HH_ZZ_b00");
    CHECK(settings[4].label == "HH_XX_b00");
    CHECK(settings[127].label == "LR_XX_b11");
    std::set<std::string> labels;
    int zz = 0, xx = 0;
    double depth = hadamard_depth();
    for (const auto& s : settings) {
        labels.insert(s.label);
        CHECK(s.idler_eom.depth == s.signal_eom.depth);
        CHECK(s.idler_eom.rf_phase == 0.0);
        if (s.idler_eom.depth == 0.0)
            ++zz;
        else {
            CHECK(s.idler_eom.depth == doctest::Approx(depth));
            ++xx;
        }
        CHECK(s.mask.idler_phases.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(labels.size() == 128);
    CHECK(zz == 64);
    CHECK(xx == 64);
}

TEST_CASE("random qutrit protocol structure and determinism") {
    auto a = protocol_qutrit720(7);
    auto b = protocol_qutrit720(7);
    auto c = protocol_qutrit720(8);
    REQUIRE(a.size() == 720);
    bool any_diff = false;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].label == b[i].label);
        CHECK(a[i].idler_eom.depth == b[i].idler_eom.depth);
        CHECK((a[i].mask.idler_phases - b[i].mask.idler_phases).cwiseAbs().maxCoeff() ==
              0.0);
        if (a[i].idler_eom.depth != c[i].idler_eom.depth) any_diff = true;
    }
    CHECK(any_diff);

    std::set<std::string> labels;
    std::set<std::string> pols;
    for (const auto& s : a) {
        labels.insert(s.label);
        pols.insert(std::string{s.pol.idler, s.pol.signal});
        CHECK(s.idler_eom.depth >= 0.0);
        CHECK(s.idler_eom.depth <= 2.32);
        CHECK(s.signal_eom.depth <= 2.32);
        CHECK(s.mask.idler_phases.minCoeff() >= 0.0);
        CHECK(s.mask.idler_phases.maxCoeff() < 2.0 * M_PI);
    }
    CHECK(labels.size() == 720);
    CHECK(pols.size() == 8);
    CHECK(pols.count("HH") == 1);
    CHECK(pols.count("DA") == 1);
    CHECK(pols.count("RL") == 0);

    // same frame shares mask and depths across polarization pairs
    // (pol index p, frame f, bins 3x3) -> flat index ((p*10)+f)*9
    CHECK(a[0 * 90 + 0].idler_eom.depth == a[1 * 90 + 0].idler_eom.depth);
    CHECK((a[0 * 90 + 9].mask.signal_phases - a[3 * 90 + 9].mask.signal_phases)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(a[0].label == "HH_f0_b00");
}
