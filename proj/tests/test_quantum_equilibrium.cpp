#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rqgas/classical_limit.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "support.hpp"

using namespace rqgas;
using test::make_species;

namespace {

const double kLn2 = std::log(2.0);

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::usage;
}

JointSpectrum flat_pair() { return JointSpectrum({make_species("A", {{0.0, 1}}), make_species("B", {{0.0, 1}})}); }

}  // namespace

TEST(Occupation, BoseUnitOccupancy) {
    EXPECT_NEAR(occupation({kLn2, 1}, 1.0, 0.0, Statistics::bose), 1.0, 1e-15);
}

TEST(Occupation, FermiSymmetryPoint) { EXPECT_DOUBLE_EQ(occupation({0.0, 4}, 1.0, 0.0, Statistics::fermi), 2.0); }

TEST(Occupation, FermiReplicaPrefactor) {
    EXPECT_NEAR(occupation({kLn2, 1}, 1.0, 0.0, Statistics::fermi, 3), 1.0, 1e-15);
}

TEST(Occupation, BoltzmannForm) {
    EXPECT_NEAR(occupation({1.0, 3}, 2.0, 0.25, Statistics::boltzmann, 2), 6.0 * std::exp(-1.5), 1e-15);
}

TEST(Occupation, CondensationBoundIsDomainError) {
    EXPECT_EQ(kind_of([] { occupation({0.0, 1}, 1.0, 0.0, Statistics::bose); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { occupation({0.0, 1}, 1.0, 0.5, Statistics::bose); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { occupation({0.0, 1}, 0.0, -1.0, Statistics::bose); }), ErrorKind::config);
}

TEST(Occupation, FermiBelowCapacityAndMonotoneInMu) {
    for (double mu = -20.0; mu <= 30.0; mu += 0.25) {
        const double n = occupation({1.0, 3}, 1.7, mu, Statistics::fermi, 2);
        EXPECT_LE(n, 6.0);
        EXPECT_GE(n, 0.0);
    }
    double prev = 0.0;
    for (double mu = -10.0; mu < 0.99; mu += 0.01) {
        const double n = occupation({1.0, 2}, 1.3, mu, Statistics::bose);
        EXPECT_GT(n, prev);
        prev = n;
    }
}

TEST(SolveCoupled, BoseTwoDegenerateEntries) {
    const auto sol = solve_mu_coupled(flat_pair(), 1.0, 2.0, Statistics::bose);
    EXPECT_NEAR(sol.beta_mu, -kLn2, 1e-12);
    EXPECT_NEAR(sol.occupations[0], 1.0, 1e-12);
    EXPECT_NEAR(sol.occupations[1], 1.0, 1e-12);
    EXPECT_EQ(sol.mode, SolutionMode::coupled);
}

TEST(SolveCoupled, FermiHalfFilling) {
    const auto sol = solve_mu_coupled(flat_pair(), 1.0, 1.0, Statistics::fermi);
    EXPECT_NEAR(sol.mu, 0.0, 1e-12);
    EXPECT_NEAR(sol.occupations[0], 0.5, 1e-12);
}

TEST(SolveCoupled, FermiAtCapacityIsSaturation) {
    EXPECT_EQ(kind_of([] { solve_mu_coupled(flat_pair(), 1.0, 2.0, Statistics::fermi); }), ErrorKind::saturation);
    EXPECT_EQ(kind_of([] { solve_mu_coupled(flat_pair(), 1.0, 3.0, Statistics::fermi); }), ErrorKind::saturation);
}

TEST(SolveCoupled, RejectsBadInputs) {
    EXPECT_EQ(kind_of([] { solve_mu_coupled(flat_pair(), 1.0, 0.0, Statistics::bose); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([] { solve_mu_coupled(flat_pair(), 1.0, 1.0, Statistics::boltzmann); }), ErrorKind::config);
    EXPECT_EQ(kind_of([] { solve_mu_coupled(flat_pair(), -1.0, 1.0, Statistics::bose); }), ErrorKind::config);
}

TEST(SolveCoupled, IterationLimitIsSolverError) {
    SolverOptions opts;
    opts.max_iterations = 1;
    test::Generator gen(3);
    const auto joint = gen.joint();
    EXPECT_EQ(kind_of([&] { solve_mu_coupled(joint, 0.7, 25.0, Statistics::bose, opts); }), ErrorKind::solver);
}

TEST(SolveCoupled, BoseMuBelowLowestLevel) {
    JointSpectrum j({make_species("A", {{0.3, 1}, {1.0, 2}}), make_species("B", {{0.5, 1}})});
    for (double n : {0.01, 1.0, 10.0, 1e4, 1e8}) {
        const auto sol = solve_mu_coupled(j, 2.0, n, Statistics::bose);
        EXPECT_LT(sol.mu, 0.3);
        EXPECT_LE(std::abs(sol.residual), 1e-10 * n);
    }
}

TEST(SolveCoupled, ConstraintAndBoundsProperty) {
    test::Generator gen(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto joint = gen.joint(1, 4, 3);
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        const double beta = gen.real(0.05, 5.0);
        const double n = gen.feasible_n(joint, stats);
        const auto sol = solve_mu_coupled(joint, beta, n, stats);
        double sum = 0.0;
        for (std::size_t i = 0; i < joint.total_levels(); ++i) {
            const auto& l = joint.entries()[i].value;
            sum += sol.occupations[i];
            EXPECT_GE(sol.occupations[i], 0.0);
            if (stats == Statistics::fermi) { EXPECT_LT(sol.occupations[i], static_cast<double>(l.degeneracy)); }
        }
        EXPECT_LE(std::abs(sum - n), 1e-10 * n);
        if (stats == Statistics::bose) { EXPECT_LT(sol.mu, joint.min_energy()); }
        double totals = 0.0;
        for (double t : sol.species_totals) totals += t;
        EXPECT_NEAR(totals, sum, 1e-12 * n);
    }
}

TEST(SolveCoupled, TotalMonotoneInMuProperty) {
    test::Generator gen(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto joint = gen.joint();
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        const double beta = gen.real(0.2, 3.0);
        const double top = stats == Statistics::bose ? joint.min_energy() - 1e-3 : 8.0;
        double prev = -1.0;
        for (double mu = top - 10.0; mu <= top; mu += 0.05) {
            double total = 0.0;
            for (const auto& e : joint.entries()) total += occupation(e.value, beta, mu, stats);
            EXPECT_GT(total, prev);
            prev = total;
        }
    }
}

TEST(SolveCoupled, ReplicaEntriesShareOccupation) {
    JointSpectrum j({make_species("A", {{0.0, 1}, {0.8, 2}}), make_species("A2", {{0.2, 1}, {0.9, 1}}, 2)});
    const auto sol = solve_mu_coupled(j, 1.0, 3.0, Statistics::bose);
    EXPECT_DOUBLE_EQ(sol.occupations[2], sol.occupations[4]);
    EXPECT_DOUBLE_EQ(sol.occupations[3], sol.occupations[5]);
    // The replica sum reproduces the nu prefactor of the occupation law.
    EXPECT_NEAR(sol.occupations[2] + sol.occupations[4], occupation({0.2, 1}, 1.0, sol.mu, Statistics::bose, 2), 1e-12);
}

TEST(SolveIndependent, BoseSingleLevel) {
    const auto sol = solve_mu_independent(make_species("A", {{0.0, 1}}), 1.0, 1.0, Statistics::bose);
    EXPECT_NEAR(sol.beta_mu, -kLn2, 1e-12);
}

TEST(SolveIndependent, FermiHalfFilled) {
    const auto sol = solve_mu_independent(make_species("A", {{0.0, 2}}), 1.0, 1.0, Statistics::fermi);
    EXPECT_NEAR(sol.beta_mu, 0.0, 1e-12);
}

TEST(SolveIndependent, ZeroTargetIsDomainError) {
    for (auto stats : {Statistics::bose, Statistics::fermi}) {
        EXPECT_EQ(kind_of([&] { solve_mu_independent(make_species("A", {{0.0, 2}}), 1.0, 0.0, stats); }),
                  ErrorKind::domain);
    }
}

TEST(SolveIndependent, PerSpeciesConstraintProperty) {
    test::Generator gen(55);
    for (int trial = 0; trial < 100; ++trial) {
        const auto joint = gen.joint();
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        std::vector<double> targets;
        for (const auto& sp : joint.species()) {
            double cap = 0.0;
            for (const auto& l : sp.levels) cap += sp.nu * static_cast<double>(l.degeneracy);
            targets.push_back(stats == Statistics::fermi ? gen.real(0.05, 0.95) * cap : gen.real(0.1, 10.0));
        }
        const auto sol = solve_independent(joint, 1.3, targets, stats);
        const auto sums = joint.species_sums(sol.occupations);
        for (std::size_t a = 0; a < targets.size(); ++a) EXPECT_LE(std::abs(sums[a] - targets[a]), 1e-10 * targets[a]);
        EXPECT_TRUE(std::isnan(sol.mu));
    }
}

TEST(SolveIndependent, DecouplingConsistencyProperty) {
    test::Generator gen(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto joint = gen.joint();
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        const double beta = gen.real(0.3, 3.0);
        const auto coupled = solve_mu_coupled(joint, beta, gen.feasible_n(joint, stats), stats);
        const auto indep = solve_independent(joint, beta, coupled.species_totals, stats);
        for (double mu_a : indep.species_mu) EXPECT_NEAR(mu_a, coupled.mu, 1e-8 * std::max(1.0, std::abs(coupled.mu)));
        for (std::size_t i = 0; i < joint.total_levels(); ++i)
            EXPECT_NEAR(indep.occupations[i], coupled.occupations[i], 1e-8 * std::max(1.0, coupled.occupations[i]));
    }
}

TEST(LogMultiplicity, Examples) {
    const std::vector<double> two{2.0};
    EXPECT_NEAR(log_multiplicity(two, std::vector<double>{2.0}, Statistics::bose), std::log(3.0), 1e-14);
    EXPECT_NEAR(log_multiplicity(two, std::vector<double>{2.0}, Statistics::fermi), 0.0, 1e-14);
    EXPECT_NEAR(log_multiplicity(two, std::vector<double>{4.0}, Statistics::fermi), std::log(6.0), 1e-14);
}

TEST(LogMultiplicity, Errors) {
    const std::vector<double> n{3.0};
    EXPECT_EQ(kind_of([&] { log_multiplicity(n, std::vector<double>{2.0}, Statistics::fermi); }), ErrorKind::domain);
    EXPECT_EQ(kind_of([&] { log_multiplicity(n, std::vector<double>{2.0, 1.0}, Statistics::bose); }), ErrorKind::config);
}

TEST(LogMultiplicity, IntegerOccupationsMatchBinomialsProperty) {
    test::Generator gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        const int g = gen.integer(1, 12);
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        const int n = stats == Statistics::fermi ? gen.integer(0, g) : gen.integer(0, 12);
        const double exact = stats == Statistics::bose ? test::binomial(g + n - 1, n) : test::binomial(g, n);
        const std::vector<double> occ{double(n)}, deg{double(g)};
        EXPECT_NEAR(log_multiplicity(occ, deg, stats), std::log(exact), 1e-12);
    }
}

TEST(GrandPotential, Examples) {
    // e^{beta(mu - e)} = 1/2
    const JointSpectrum one({make_species("A", {{kLn2, 1}})});
    EXPECT_NEAR(grand_potential_log(one, 1.0, 0.0, Statistics::bose), kLn2, 1e-14);
    EXPECT_NEAR(grand_potential_log(one, 1.0, 0.0, Statistics::fermi), std::log(1.5), 1e-14);
    const JointSpectrum three({make_species("A", {{kLn2, 3}})});
    for (auto stats : {Statistics::bose, Statistics::fermi})
        EXPECT_NEAR(grand_potential_log(three, 1.0, 0.0, stats), 3.0 * grand_potential_log(one, 1.0, 0.0, stats), 1e-14);
    EXPECT_EQ(kind_of([&] { grand_potential_log(one, 1.0, 1.0, Statistics::bose); }), ErrorKind::domain);
}

TEST(CanonicalFromGrand, Examples) {
    const JointSpectrum bose({make_species("A", {{0.0, 1}})});
    EXPECT_NEAR(canonical_logZ_from_grand(bose, 1.0, 1.0, Statistics::bose), 2.0 * kLn2, 1e-12);
    const JointSpectrum fermi({make_species("A", {{0.0, 2}})});
    EXPECT_NEAR(canonical_logZ_from_grand(fermi, 1.0, 1.0, Statistics::fermi), 2.0 * kLn2, 1e-12);
}

TEST(CanonicalFromGrand, DiluteLimitApproachesClassical) {
    JointSpectrum j({make_species("A", {{0.0, 1'000'000'000'000}, {1.0, 3'000'000'000'000}})});
    const double n = 1e4;
    for (auto stats : {Statistics::bose, Statistics::fermi}) {
        const double q = canonical_logZ_from_grand(j, 1.0, n, stats);
        const auto eq = classical_equilibrium(j, 1.0, n);
        EXPECT_LE(std::abs(q - eq.log_z_coupled) / std::abs(eq.log_z_coupled), 0.01);
    }
}

TEST(MeanEnergy, IsOccupationWeightedSum) {
    JointSpectrum j({make_species("A", {{0.0, 1}, {2.0, 2}})});
    const auto sol = solve_mu_coupled(j, 1.0, 1.5, Statistics::fermi);
    EXPECT_NEAR(mean_energy(j, sol), 2.0 * sol.occupations[1], 1e-14);
}

TEST(ClassicalConsistency, DiluteOccupationsMatchBoltzmannProperty) {
    test::Generator gen(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto joint = gen.joint();
        const auto stats = gen.coin() ? Statistics::bose : Statistics::fermi;
        const double beta = gen.real(0.5, 2.0);
        // Choose N so the fugacity at the lowest level is about 1e-9.
        double z = 0.0;
        for (const auto& e : joint.entries())
            z += static_cast<double>(e.value.degeneracy) * std::exp(-beta * (e.value.energy - joint.min_energy()));
        const auto sol = solve_mu_coupled(joint, beta, 1e-9 * z, stats);
        for (std::size_t i = 0; i < joint.total_levels(); ++i) {
            const double mb = occupation(joint.entries()[i].value, beta, sol.mu, Statistics::boltzmann);
            EXPECT_LE(std::abs(sol.occupations[i] - mb) / mb, 2e-8);
        }
    }
}
