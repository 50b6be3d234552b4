function loadReports(token) {
  $.ajax({
    url: "https://api.example.com/v1/reports",
    type: "GET",
    data: { access_token: token }
  });
}
