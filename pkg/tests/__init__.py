# End-to-end tests for grassmann_engine
