# Unit tests for grassmann_engine
