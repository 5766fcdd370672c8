// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gpvortex/coefficients.hpp"
#include "gpvortex/field.hpp"
#include "gpvortex/field_io.hpp"
#include "gpvortex/grid.hpp"
#include "gpvortex/kwong.hpp"
#include "gpvortex/linops.hpp"
#include "gpvortex/minimize.hpp"
#include "gpvortex/psi_set.hpp"
#include "gpvortex/radial.hpp"
#include "gpvortex/spectral.hpp"
#include "gpvortex/verify.hpp"
