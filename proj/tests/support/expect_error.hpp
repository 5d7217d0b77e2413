// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gtest/gtest.h>

#include <string>

#include "layergraph/error.hpp"

// Asserts that `stmt` throws layergraph::Error with the given code. Extra
// arguments are substrings the message must contain.
#define EXPECT_LG_ERROR(stmt, error_code, ...)                                          \
  do {                                                                                  \
    bool lg_thrown = false;                                                             \
    try {                                                                               \
      stmt;                                                                             \
    } catch (const ::layergraph::Error& lg_e) {                                         \
      lg_thrown = true;                                                                 \
      EXPECT_EQ(lg_e.code(), ::layergraph::ErrorCode::error_code) << lg_e.what();       \
      for (const std::string lg_part : std::initializer_list<std::string>{__VA_ARGS__}) { \
        EXPECT_NE(std::string(lg_e.what()).find(lg_part), std::string::npos)            \
            << "'" << lg_part << "' not in: " << lg_e.what();                           \
      }                                                                                 \
    }                                                                                   \
    EXPECT_TRUE(lg_thrown) << #stmt " did not throw";                                   \
  } while (false)
