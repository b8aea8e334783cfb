# hyperlab unit tests
