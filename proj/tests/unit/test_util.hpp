#pragma once

#include <gtest/gtest.h>

#include "spikeosc/errors.hpp"

// Asserts that `stmt` throws spikeosc::Error carrying `errc`.
#define EXPECT_ERRC(stmt, errc)                                          \
  do {                                                                   \
    try {                                                                \
      stmt;                                                              \
      ADD_FAILURE() << "expected " #errc " from " #stmt;                 \
    } catch (const ::spikeosc::Error& e_) {                              \
      EXPECT_EQ(e_.code(), errc) << e_.what();                           \
    }                                                                    \
  } while (0)
