#pragma once

#include "modsamp/errors.hpp"
#include "modsamp/special_functions.hpp"
#include "modsamp/spectral.hpp"
#include "modsamp/signal_core.hpp"
#include "modsamp/analog_chain.hpp"
#include "modsamp/adc.hpp"
#include "modsamp/recovery.hpp"
#include "modsamp/metrics.hpp"
#include "modsamp/experiments/text.hpp"
#include "modsamp/experiments/sweep.hpp"
#include "modsamp/experiments/results_io.hpp"
#include "modsamp/experiments/capture.hpp"
