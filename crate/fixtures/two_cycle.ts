.initial p0
p0 a p1
p1 b p0
