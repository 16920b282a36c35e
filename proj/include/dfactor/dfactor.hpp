#pragma once

#include "adf.hpp"
#include "calendar.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "factors.hpp"
#include "options.hpp"
#include "panel.hpp"
#include "performance.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "regression.hpp"
#include "report.hpp"
#include "series.hpp"
#include "stats.hpp"
#include "synthetic.hpp"
