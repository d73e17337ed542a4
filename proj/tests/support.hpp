#pragma once

#include <gtest/gtest.h>

#include "odec/error.hpp"

/// Asserts that `stmt` throws odec::Error carrying `code`.
#define EXPECT_ODEC_ERROR(stmt, expected)                                   \
  do {                                                                      \
    try {                                                                   \
      stmt;                                                                 \
      ADD_FAILURE() << "expected " << odec::to_string(expected);            \
    } catch (const odec::Error& e) {                                        \
      EXPECT_EQ(e.code(), expected) << e.what();                            \
    }                                                                       \
  } while (0)
