#pragma once

#include "nivib/core.hpp"
#include "nivib/analytic_phase.hpp"
#include "nivib/contrast.hpp"
#include "nivib/path_oracle.hpp"
