"""Monte Carlo experiments, reports and the command line."""
