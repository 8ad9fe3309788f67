// CSV report emission
