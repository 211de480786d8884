// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "chanpred/channel.hpp"
#include "chanpred/config.hpp"
#include "chanpred/error.hpp"
#include "chanpred/harness.hpp"
#include "chanpred/neural.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/rng.hpp"
#include "chanpred/wiener.hpp"
