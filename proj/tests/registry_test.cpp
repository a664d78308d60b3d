#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"

using namespace crsf;
using namespace crsf::test;

namespace {

Registry sensing_registry() {
  Registry reg;
  reg.add_service_type(sensing(), sensing_descriptors());
  return reg;
}

}  // namespace

TEST(ServiceTypeId, AcceptsLowercaseAlphanumericAndHyphen) {
  EXPECT_EQ(ServiceTypeId("ai-ml-2").name(), "ai-ml-2");
  EXPECT_THROW(ServiceTypeId(""), Error);
  EXPECT_THROW(ServiceTypeId("Sensing"), Error);
  EXPECT_THROW(ServiceTypeId("sens ing"), Error);
  EXPECT_THROW(ServiceTypeId("sens_ing"), Error);
}

TEST(Registry, RegisterIntoEmptyRegistry) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 1));
  EXPECT_EQ(reg.size(), 1u);
  EXPECT_EQ(reg.find(SfId(1))->last_update_slot, 0);
}

TEST(Registry, ReRegistrationReplacesProfile) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 1, 30));
  reg.advance_slot();
  reg.register_sf(sensing_sf(1, 1, 42));
  ASSERT_EQ(reg.size(), 1u);
  EXPECT_EQ(reg.find(SfId(1))->profile.capacity, 42);
  EXPECT_EQ(reg.find(SfId(1))->last_update_slot, 1);
}

TEST(Registry, RejectsWrongParameterCount) {
  Registry reg = sensing_registry();
  SfProfile p = sensing_sf(1, 1);
  p.qos_params.pop_back();
  try {
    reg.register_sf(p);
    FAIL() << "expected a schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
  }
  EXPECT_EQ(reg.size(), 0u);
}

TEST(Registry, RejectsOutOfRangeParameterAndNegativeCapacity) {
  Registry reg = sensing_registry();
  SfProfile p = sensing_sf(1, 1);
  p.qos_params[4] = 1.5;
  EXPECT_THROW(reg.register_sf(p), Error);
  EXPECT_THROW(reg.register_sf(sensing_sf(2, 2, -1.0)), Error);
  EXPECT_EQ(reg.size(), 0u);
}

TEST(Registry, RejectsSecondSfInSameSubnetwork) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 7));
  try {
    reg.register_sf(sensing_sf(2, 7));
    FAIL() << "expected a duplicate error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::duplicate);
  }
  EXPECT_EQ(reg.size(), 1u);
}

TEST(Registry, SameSubnetworkMayHostOtherServiceTypes) {
  Registry reg = sensing_registry();
  const ServiceTypeId loc("localization");
  reg.add_service_type(loc, {{"accuracy", "m", QosDirection::cost, 0, 10}});
  reg.register_sf(sensing_sf(1, 7));
  reg.register_sf({SfId(2), SubnetworkId(7), loc, {3}, 10});
  EXPECT_EQ(reg.size(), 2u);
}

TEST(Registry, UnknownServiceType) {
  Registry reg = sensing_registry();
  SfProfile p = sensing_sf(1, 1);
  p.service_type = ServiceTypeId("localization");
  try {
    reg.register_sf(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_service_type);
  }
}

TEST(Registry, UpdateCapacity) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 1, 30));
  reg.advance_slot();
  reg.advance_slot();
  reg.update_capacity(SfId(1), 45);
  EXPECT_EQ(reg.find(SfId(1))->profile.capacity, 45);
  EXPECT_EQ(reg.find(SfId(1))->last_update_slot, 2);

  try {
    reg.update_capacity(SfId(99), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
  }
  EXPECT_THROW(reg.update_capacity(SfId(1), -1), Error);
  EXPECT_EQ(reg.find(SfId(1))->profile.capacity, 45);
}

TEST(Registry, SnapshotFiltersByTypeAndIsIndependent) {
  Registry reg = sensing_registry();
  const ServiceTypeId loc("localization");
  reg.add_service_type(loc, {{"accuracy", "m", QosDirection::cost, 0, 10}});
  reg.register_sf(sensing_sf(3, 3));
  reg.register_sf(sensing_sf(1, 1));
  reg.register_sf(sensing_sf(2, 2));
  reg.register_sf({SfId(4), SubnetworkId(4), loc, {3}, 10});

  auto snap = reg.snapshot(sensing());
  ASSERT_EQ(snap.size(), 3u);
  EXPECT_EQ(snap[0].sf_id, SfId(1));
  EXPECT_EQ(snap[2].sf_id, SfId(3));

  reg.update_capacity(SfId(1), 5);
  EXPECT_EQ(snap[0].capacity, 40);
  EXPECT_TRUE(Registry().snapshot(sensing()).empty());
}

TEST(Registry, DeregisterFreesSubnetwork) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 1));
  reg.deregister_sf(SfId(1));
  EXPECT_EQ(reg.size(), 0u);
  reg.register_sf(sensing_sf(2, 1));
  EXPECT_EQ(reg.size(), 1u);
  EXPECT_THROW(reg.deregister_sf(SfId(1)), Error);
}

TEST(Registry, IdenticalReRegistrationIsIdempotent) {
  Registry reg = sensing_registry();
  reg.register_sf(sensing_sf(1, 1));
  const auto once = reg.snapshot(sensing());
  reg.register_sf(sensing_sf(1, 1));
  EXPECT_EQ(reg.snapshot(sensing()), once);
}

// Random operation sequences against a simple model of the catalog.
TEST(RegistryProperty, InvariantsHoldUnderRandomOperations) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Registry reg = sensing_registry();
    std::map<SfId, SfProfile> model;
    std::uniform_int_distribution<int> op(0, 3), id(1, 8), subnet(1, 5);
    std::uniform_real_distribution<double> cap(-2, 60);
    for (int step = 0; step < 40; ++step) {
      const SfId sf(id(rng));
      switch (op(rng)) {
        case 0:
        case 1: {
          SfProfile p = sensing_sf(sf.value(), subnet(rng), cap(rng));
          bool ok = p.capacity >= 0;
          for (const auto& [other, q] : model)
            if (other != sf && q.subnetwork_id == p.subnetwork_id) ok = false;
          if (ok) {
            reg.register_sf(p);
            model[sf] = p;
          } else {
            EXPECT_THROW(reg.register_sf(p), Error);
          }
          break;
        }
        case 2: {
          const double c = cap(rng);
          if (model.count(sf) && c >= 0) {
            reg.update_capacity(sf, c);
            model[sf].capacity = c;
          } else {
            EXPECT_THROW(reg.update_capacity(sf, c), Error);
          }
          break;
        }
        case 3:
          if (model.erase(sf)) {
            reg.deregister_sf(sf);
          } else {
            EXPECT_THROW(reg.deregister_sf(sf), Error);
          }
          break;
      }
      if (step % 7 == 0) reg.advance_slot();

      const auto snap = reg.snapshot(sensing());
      ASSERT_EQ(snap.size(), model.size());
      std::set<SubnetworkId> subnets;
      for (std::size_t i = 0; i < snap.size(); ++i) {
        if (i) {
          EXPECT_LT(snap[i - 1].sf_id, snap[i].sf_id);
        }
        EXPECT_TRUE(subnets.insert(snap[i].subnetwork_id).second);
        EXPECT_GE(snap[i].capacity, 0.0);
        EXPECT_EQ(snap[i], model.at(snap[i].sf_id));
      }
    }
  }
}

TEST(RegistryProperty, SnapshotIgnoresRegistrationOrder) {
  std::mt19937_64 rng(5);
  std::vector<SfProfile> profiles;
  for (int i = 1; i <= 8; ++i) profiles.push_back(sensing_sf(i * 3, i, 10.0 * i));
  Registry ref = sensing_registry();
  for (const auto& p : profiles) ref.register_sf(p);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(profiles.begin(), profiles.end(), rng);
    Registry reg = sensing_registry();
    for (const auto& p : profiles) reg.register_sf(p);
    EXPECT_EQ(reg.snapshot(sensing()), ref.snapshot(sensing()));
  }
}
