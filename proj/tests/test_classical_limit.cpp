#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rqgas/classical_limit.hpp"
#include "rqgas/exact_oracle.hpp"
#include "support.hpp"

using namespace rqgas;
using test::make_species;

namespace {

const double kLn2 = std::log(2.0);

/// Species A with Z^A = 1 and B with Z^B = 3 at beta = 1.
JointSpectrum one_and_three() {
    return JointSpectrum({make_species("A", {{0.0, 1}}), make_species("B", {{0.0, 1}, {0.0, 2}})});
}

}  // namespace

TEST(MbPartition, Examples) {
    const std::vector<EnergyLevel> one{{0.0, 1}};
    EXPECT_DOUBLE_EQ(mb_partition(one, 1.0), 1.0);
    const std::vector<EnergyLevel> two{{0.0, 1}, {kLn2, 2}};
    EXPECT_NEAR(mb_partition(two, 1.0), 2.0, 1e-15);
}

TEST(MbPartition, DecreasingInBeta) {
    const std::vector<EnergyLevel> l{{0.0, 1}, {0.4, 2}, {1.3, 5}};
    double prev = INFINITY;
    for (double beta = 0.05; beta < 20.0; beta *= 1.3) {
        const double z = mb_partition(l, beta);
        EXPECT_LT(z, prev);
        prev = z;
    }
}

TEST(MbPartition, LowestEnergyFactoredOut) {
    const std::vector<EnergyLevel> l{{1000.0, 1}, {1001.0, 1}};
    EXPECT_NEAR(log_mb_partition(l, 1.0), -1000.0 + std::log1p(std::exp(-1.0)), 1e-12);
}

TEST(ClassicalEquilibrium, ProportionalSplit) {
    const auto eq = classical_equilibrium(one_and_three(), 1.0, 8.0);
    EXPECT_NEAR(eq.p_species[0], 0.25, 1e-15);
    EXPECT_NEAR(eq.species_totals[0], 2.0, 1e-14);
    EXPECT_NEAR(eq.species_totals[1], 6.0, 1e-14);
}

TEST(ClassicalEquilibrium, CoupledPartitionFunction) {
    const auto eq = classical_equilibrium(one_and_three(), 1.0, 2.0);
    EXPECT_NEAR(eq.z_eq, 4.0, 1e-15);
    EXPECT_NEAR(eq.log_z_coupled, std::log(8.0), 1e-14);
}

TEST(ClassicalEquilibrium, SpeciesChemicalPotential) {
    // Z^A = 2 and N^A = 4: species A alone with two degenerate states.
    const JointSpectrum j({make_species("A", {{0.0, 2}})});
    const auto eq = classical_equilibrium(j, 1.0, 4.0);
    EXPECT_NEAR(eq.mu_species[0], kLn2, 1e-14);
    EXPECT_NEAR(eq.free_energy, 4.0 * kLn2, 1e-13);
}

TEST(ClassicalEquilibrium, NonPositiveNIsConfigError) {
    try {
        classical_equilibrium(one_and_three(), 1.0, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
}

TEST(ClassicalEquilibrium, ReplicaConvention) {
    const JointSpectrum j({make_species("A", {{0.0, 1}, {0.5, 1}}), make_species("D", {{-0.2, 1}, {0.3, 2}}, 2)});
    const double beta = 1.1, n = 5.0;
    const auto eq = classical_equilibrium(j, beta, n);
    const double za = mb_partition(j.species()[0].levels, beta);
    const double zd = mb_partition(j.species()[1].levels, beta);
    EXPECT_NEAR(eq.z_eq, za + zd * zd, 1e-13);
    EXPECT_NEAR(eq.p_species[1], zd * zd / (za + zd * zd), 1e-14);
    // Each of the two replica copies carries half of the species occupation.
    EXPECT_NEAR(eq.occupations[2], eq.occupations[4], 1e-15);
    EXPECT_NEAR(eq.occupations[2] + eq.occupations[3] + eq.occupations[4] + eq.occupations[5], eq.species_totals[1], 1e-13);
}

TEST(ClassicalEquilibrium, InvariantsProperty) {
    test::Generator gen(606);
    for (int trial = 0; trial < 200; ++trial) {
        const auto j = gen.joint(1, 4, 3);
        const double beta = gen.real(0.1, 4.0);
        const double n = gen.real(0.5, 1e3);
        const auto eq = classical_equilibrium(j, beta, n);
        double ps = 0.0, pl = 0.0, occ = 0.0;
        for (double p : eq.p_species) ps += p;
        for (double p : eq.p_level) pl += p;
        for (double o : eq.occupations) occ += o;
        EXPECT_NEAR(ps, 1.0, 1e-14);
        EXPECT_NEAR(pl, 1.0, 1e-13);
        EXPECT_NEAR(occ, n, 1e-12 * n);
        bool all_nu_one = true;
        for (const auto& sp : j.species()) all_nu_one = all_nu_one && sp.nu == 1;
        for (std::size_t i = 0; i < j.total_levels(); ++i) {
            const auto& e = j.entries()[i];
            const int nu = j.species()[e.species].nu;
            EXPECT_NEAR(eq.p_level[i], eq.p_species[e.species] * eq.p_within_species[i] / nu, 1e-14 * eq.p_level[i] + 1e-300);
            if (all_nu_one) {
                const double boltzmann = e.value.degeneracy * std::exp(-beta * e.value.energy + eq.beta_mu);
                EXPECT_NEAR(eq.occupations[i], boltzmann, 1e-12 * boltzmann);
            }
        }
        for (double t : eq.species_totals) EXPECT_GE(t, 0.0);
        if (!all_nu_one) {
        } else if (j.species_count() == 1) {
            EXPECT_NEAR(eq.log_z_coupled, eq.log_z_frozen, 1e-9 * std::abs(eq.log_z_coupled) + 1e-12);
        } else {
            EXPECT_GT(eq.log_z_coupled, eq.log_z_frozen);
        }
        if (all_nu_one) {
            for (double mu : eq.mu_species) EXPECT_NEAR(beta * mu, eq.beta_mu, 1e-12 * std::max(1.0, std::abs(eq.beta_mu)));
        }
    }
}

TEST(MassAction, RatiosAgree) {
    const auto j = one_and_three();
    const auto pairs = mass_action_check(j, classical_equilibrium(j, 1.0, 8.0));
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_NEAR(pairs[0].z_ratio, 3.0, 1e-14);
    EXPECT_NEAR(pairs[0].n_ratio, 3.0, 1e-14);
    EXPECT_TRUE(pairs[0].applicable);
    EXPECT_FALSE(pairs[0].degenerate);
}

TEST(MassAction, SymmetricPair) {
    const auto j = test::equal_pair(3);
    const auto pairs = mass_action_check(j, classical_equilibrium(j, 1.0, 5.0));
    EXPECT_DOUBLE_EQ(pairs[0].z_ratio, 1.0);
    EXPECT_NEAR(pairs[0].n_ratio, 1.0, 1e-15);
}

TEST(MassAction, ChainIsTransitive) {
    const JointSpectrum j({make_species("A", {{0.0, 1}, {1.0, 2}}), make_species("B", {{0.2, 3}}), make_species("C", {{-0.1, 1}, {0.7, 1}})});
    const auto pairs = mass_action_check(j, classical_equilibrium(j, 1.4, 10.0));
    ASSERT_EQ(pairs.size(), 3u);  // AB, AC, BC
    EXPECT_NEAR(pairs[1].z_ratio, pairs[2].z_ratio * pairs[0].z_ratio, 1e-14);
    EXPECT_NEAR(pairs[1].n_ratio, pairs[2].n_ratio * pairs[0].n_ratio, 1e-13);
}

TEST(MassAction, ReplicatedSpeciesFlaggedNotApplicable) {
    const JointSpectrum j({make_species("A", {{0.0, 1}}), make_species("A2", {{0.0, 1}}, 2)});
    const auto pairs = mass_action_check(j, classical_equilibrium(j, 1.0, 3.0));
    EXPECT_FALSE(pairs[0].applicable);
}

TEST(Variances, SymmetricScaledForm) {
    const auto j = test::equal_pair();
    const auto eq = classical_equilibrium(j, 1.0, 2.0);
    const auto r = classical_variances(eq, 2.0);
    EXPECT_NEAR(r.species_scaled_form[0] / 4.0, 0.25, 1e-15);
    EXPECT_NEAR(r.species_multinomial[0], 0.5, 1e-15);
    EXPECT_FALSE(r.species_oracle.has_value());
}

TEST(Variances, DeterministicOccupationGivesZero) {
    const JointSpectrum j({make_species("A", {{0.0, 1}})});
    const auto r = classical_variances(classical_equilibrium(j, 1.0, 3.0), 3.0);
    EXPECT_DOUBLE_EQ(r.level_scaled_form[0], 0.0);
    EXPECT_DOUBLE_EQ(r.level_multinomial[0], 0.0);
    EXPECT_DOUBLE_EQ(r.species_scaled_form[0], 0.0);
}

TEST(Variances, OracleAdjudicatesMultinomialForm) {
    const auto j = test::equal_pair();
    const auto eq = classical_equilibrium(j, 1.0, 2.0);
    const auto ex = exact_statistics(j, 2, 1.0, Statistics::boltzmann);
    const auto r = classical_variances(eq, 2.0, &ex);
    ASSERT_TRUE(r.species_oracle.has_value());
    EXPECT_NEAR((*r.species_oracle)[0], 0.5, 1e-12);
    EXPECT_NEAR(r.species_multinomial_discrepancy[0], 0.0, 1e-12);
    EXPECT_NEAR(r.species_scaled_form[0], 1.0, 1e-12);
    EXPECT_NEAR(r.species_scaled_discrepancy[0], -0.5, 1e-12);
}

TEST(Variances, MultinomialMatchesOracleProperty) {
    test::Generator gen(88);
    for (int trial = 0; trial < 40; ++trial) {
        const JointSpectrum j({make_species("A", gen.levels(1, 3, 2.0, 3)), make_species("B", gen.levels(1, 3, 2.0, 3))});
        const int n = gen.integer(1, 5);
        const double beta = gen.real(0.2, 2.0);
        const auto eq = classical_equilibrium(j, beta, n);
        const auto ex = exact_statistics(j, n, beta, Statistics::boltzmann);
        const auto r = classical_variances(eq, n, &ex);
        for (double d : r.level_multinomial_discrepancy) EXPECT_NEAR(d, 0.0, 1e-10);
        for (double d : r.species_multinomial_discrepancy) EXPECT_NEAR(d, 0.0, 1e-10);
        for (std::size_t i = 0; i < j.total_levels(); ++i)
            EXPECT_NEAR(ex.mean_occupation[i], eq.occupations[i], 1e-10 * n);
        for (double v : r.level_scaled_form) EXPECT_GE(v, 0.0);
    }
}

TEST(Variances, MismatchedOracleIsUsageError) {
    const auto eq = classical_equilibrium(test::equal_pair(), 1.0, 2.0);
    const auto ex = exact_statistics(test::tiny_bose(), 2, 1.0, Statistics::boltzmann);
    const JointSpectrum three({make_species("A", {{0.0, 1}, {1.0, 1}, {2.0, 1}})});
    const auto other = exact_statistics(three, 2, 1.0, Statistics::boltzmann);
    EXPECT_NO_THROW(classical_variances(eq, 2.0, &ex));
    EXPECT_THROW(classical_variances(eq, 2.0, &other), Error);
}
