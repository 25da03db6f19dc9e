// SPDX-License-Identifier: Apache-2.0
#include <filesystem>

#include <gtest/gtest.h>

#include "properties.hpp"

TEST(Property, RunsAreByteIdentical) {
    const auto dir = std::filesystem::temp_directory_path() / "tensim_prop_determinism";
    props::Outcome o = props::determinism(dir.string());
    EXPECT_TRUE(o.ok) << o.detail;
    std::filesystem::remove_all(dir);
}
