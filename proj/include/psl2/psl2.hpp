// SPDX-License-Identifier: Apache-2.0
// Everything except the command-line front end (psl2/cli.hpp).
#pragma once

#include "psl2/error.hpp"
#include "psl2/group.hpp"
#include "psl2/jacquet.hpp"
#include "psl2/kirillov.hpp"
#include "psl2/kloosterman.hpp"
#include "psl2/lie.hpp"
#include "psl2/report.hpp"
#include "psl2/spectra_data.hpp"
#include "psl2/spectral.hpp"
#include "psl2/suites.hpp"
