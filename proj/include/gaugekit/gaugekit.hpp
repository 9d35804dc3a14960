#pragma once

#include "gaugekit/dynamics.hpp"
#include "gaugekit/field_io.hpp"
#include "gaugekit/gauge_kernels.hpp"
#include "gaugekit/matter_sources.hpp"
#include "gaugekit/potentials_energy.hpp"
#include "gaugekit/retarded_oracle.hpp"
#include "gaugekit/version.hpp"
