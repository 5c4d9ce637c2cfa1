#pragma once

#include "core.hpp"
#include "random.hpp"
#include "ensembles.hpp"
#include "ascent.hpp"
#include "opnorm.hpp"
#include "bounds.hpp"
#include "momentslab.hpp"
#include "harness.hpp"
