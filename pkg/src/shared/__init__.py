"""Configuration, errors, caching and the worker pool shared by all packages."""
