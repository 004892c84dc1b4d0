#pragma once


#include <gtest/gtest.h>

#include "dynwm/error.h"
#include "sim_fixtures.h"

namespace dynwm {
namespace test {

// The ErrorCode raised by f, or a test failure if it does not throw.
template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dynwm::Error thrown";
  return ErrorCode::kIOFailure;
}

}  // namespace test
}  // namespace dynwm
