#include <doctest.h>

#include <filesystem>

#include "relaxdice/errors.hpp"
#include "relaxdice/mdp.hpp"
#include "relaxdice/pipeline.hpp"
#include "relaxdice/pointmass.hpp"

using namespace relaxdice;

TEST_CASE("mixing draws the requested counts from each pool") {
    const auto mdp = random_mdp(5, 2, 0.9, 1);
    const auto e = sample_trajectories(mdp, random_policy_table(5, 2, 3.0, 2), 500, 3);
    const auto r = sample_trajectories(mdp, TabularPolicy::uniform(5, 2), 2000, 4);
    const auto spec = mix_spec_for_level(MixLevel::L2, 1000);
    CHECK(spec.n_expert == 150);
    const auto mixed = mix_datasets(e, r, spec, 9);
    CHECK(mixed.size() == 1150);
    CHECK(mixed.role == DatasetRole::suboptimal);
    CHECK(mixed == mix_datasets(e, r, spec, 9));
    CHECK_FALSE(mixed == mix_datasets(e, r, spec, 10));
    CHECK_THROWS_AS(mix_datasets(e, r, MixSpec{600, 10, MixLevel::custom}, 1), InvalidArgument);
}

TEST_CASE("level names round trip") {
    for (auto l : {MixLevel::L1, MixLevel::L2, MixLevel::L3, MixLevel::L4})
        CHECK(mix_level_from_string(to_string(l)) == l);
    CHECK(level_ratio(MixLevel::L4) == doctest::Approx(0.05));
}

TEST_CASE("tabular dataset serialization round trips and detects corruption") {
    const auto mdp = random_mdp(3, 2, 0.9, 1);
    auto d = sample_trajectories(mdp, TabularPolicy::uniform(3, 2), 50, 2);
    add_provenance(d, "note", "x");
    const auto bytes = serialize_dataset(d);
    CHECK(deserialize_dataset(bytes) == d);
    auto bad = bytes;
    bad[bad.size() / 2] ^= 1;
    CHECK_THROWS_AS(deserialize_dataset(bad), FormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize_dataset(trailing), FormatError);
    CHECK_THROWS_AS(deserialize_dataset({}), FormatError);
}

TEST_CASE("continuous dataset round trips through a file") {
    const PointMass env{PointMassSpec{}};
    const auto d = sample_pointmass(env, pointmass_random(env), 100, 4);
    const auto path = (std::filesystem::temp_directory_path() / "relaxdice_pm.rdxd").string();
    save_dataset(d, path);
    CHECK(load_dataset(path) == d);
    std::filesystem::remove(path);
}

TEST_CASE("mdp serialization round trips") {
    const auto mdp = random_mdp(4, 3, 0.95, 7);
    CHECK(deserialize_mdp(serialize_mdp(mdp)) == mdp);
}
