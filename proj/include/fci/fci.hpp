#pragma once

#include "fci/bounds.hpp"
#include "fci/errors.hpp"
#include "fci/experiment.hpp"
#include "fci/hamiltonian.hpp"
#include "fci/indices.hpp"
#include "fci/lattice.hpp"
#include "fci/plot.hpp"
#include "fci/spectral.hpp"
