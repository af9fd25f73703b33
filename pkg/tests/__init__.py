# Tests Package
# Contains unit and integration tests for the collaborative editing system
