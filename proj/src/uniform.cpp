namespace ctheta {}
