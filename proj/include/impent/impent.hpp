#pragma once

#include "point.hpp"
#include "metric_space.hpp"
#include "semiflow.hpp"
#include "impulsive.hpp"
#include "regularity.hpp"
#include "parallel.hpp"
#include "pseudometric.hpp"
#include "net_count.hpp"
#include "growth.hpp"
#include "entropy_table.hpp"
#include "metric_entropy.hpp"
#include "config.hpp"
#include "report.hpp"
#include "suites.hpp"
