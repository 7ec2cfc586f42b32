#pragma once

#include <string>

#include "doctest.h"
#include "topicforge/error.hpp"

// Asserts that expr throws topicforge::Error carrying the given code.
#define CHECK_CODE(expr, expected)                                          \
  do {                                                                      \
    bool tf_thrown_ = false;                                                \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const topicforge::Error& tf_e_) {                              \
      tf_thrown_ = true;                                                    \
      CHECK_MESSAGE(tf_e_.code() == (expected), std::string(tf_e_.what()));            \
    }                                                                       \
    CHECK_MESSAGE(tf_thrown_, "expected " << topicforge::to_string(expected)); \
  } while (0)
