# CLI Module
# Run configuration, CSV/manifest output, and the subcommand entry point
