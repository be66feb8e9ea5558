# Pipeline stages: indicators -> dataset -> network -> training -> evaluation
