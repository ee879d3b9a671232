"""Labels, fold assignment, metrics, statistics and the experiment driver."""
