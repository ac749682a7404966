# Superconnection Transport Verifier: source package
