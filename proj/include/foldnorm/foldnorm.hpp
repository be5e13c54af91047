#pragma once

// Umbrella header for the folded normal toolkit.

#include "foldnorm/distribution.hpp"
#include "foldnorm/estimation.hpp"
#include "foldnorm/information.hpp"
#include "foldnorm/io.hpp"
#include "foldnorm/numerics.hpp"
#include "foldnorm/resampling.hpp"
#include "foldnorm/rng.hpp"
#include "foldnorm/studies.hpp"
