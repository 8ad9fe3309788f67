// scenario ingestion and suite runner
