#pragma once

#include "dpath/errors.hpp"
#include "dpath/patterns.hpp"
#include "dpath/system.hpp"
#include "dpath/polytope.hpp"
#include "dpath/quadrature.hpp"
#include "dpath/parallel.hpp"
#include "dpath/constant_fields.hpp"
#include "dpath/flows.hpp"
#include "dpath/functionals.hpp"
#include "dpath/kernel.hpp"
#include "dpath/reach.hpp"

namespace dpath {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dpath
