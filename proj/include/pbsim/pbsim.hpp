// pbsim.hpp - umbrella header.

#pragma once

#include "pbsim/core.hpp"
#include "pbsim/linalg.hpp"
#include "pbsim/spectral.hpp"
#include "pbsim/state.hpp"
#include "pbsim/hamiltonians.hpp"
#include "pbsim/evolution.hpp"
#include "pbsim/observables.hpp"
#include "pbsim/spectra.hpp"
#include "pbsim/frequency_domain.hpp"
#include "pbsim/scenarios.hpp"
#include "pbsim/config.hpp"
#include "pbsim/io.hpp"
