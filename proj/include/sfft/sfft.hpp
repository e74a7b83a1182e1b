#pragma once

#include "sfft/bench.hpp"
#include "sfft/errors.hpp"
#include "sfft/freq_estimate.hpp"
#include "sfft/metrics.hpp"
#include "sfft/recovery.hpp"
#include "sfft/signal_io.hpp"
#include "sfft/signal_model.hpp"
#include "sfft/spectral.hpp"
